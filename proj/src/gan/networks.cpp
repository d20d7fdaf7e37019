#include "rlcf/gan/networks.hpp"

#include <cmath>

namespace rlcf::gan {
namespace nn = torch::nn;

namespace {

nn::InstanceNorm2d instance_norm(int channels) {
  return nn::InstanceNorm2d(nn::InstanceNorm2dOptions(channels).affine(true));
}

nn::Conv2d conv(int in, int out, int kernel, int stride, int padding, bool bias) {
  return nn::Conv2d(
      nn::Conv2dOptions(in, out, kernel).stride(stride).padding(padding).bias(bias));
}

} // namespace

ResidualBlockImpl::ResidualBlockImpl(int channels) {
  body_ = register_module(
      "body", nn::Sequential(conv(channels, channels, 3, 1, 1, false), instance_norm(channels),
                             nn::ReLU(), conv(channels, channels, 3, 1, 1, false),
                             instance_norm(channels)));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor &x) { return x + body_->forward(x); }

GeneratorImpl::GeneratorImpl(const ArchitectureConfig &config) : config_(config) {
  config_.validate();
  nn::Sequential seq;
  int c = config.base_width;
  seq->push_back(conv(3 + config.num_actions, c, 7, 1, 3, false));
  seq->push_back(instance_norm(c));
  seq->push_back(nn::ReLU());
  for (int i = 0; i < config.sampling_stages; ++i) {
    seq->push_back(conv(c, 2 * c, 4, 2, 1, false));
    seq->push_back(instance_norm(2 * c));
    seq->push_back(nn::ReLU());
    c *= 2;
  }
  for (int i = 0; i < config.residual_blocks; ++i)
    seq->push_back(ResidualBlock(c));
  for (int i = 0; i < config.sampling_stages; ++i) {
    seq->push_back(nn::ConvTranspose2d(
        nn::ConvTranspose2dOptions(c, c / 2, 4).stride(2).padding(1).bias(false)));
    seq->push_back(instance_norm(c / 2));
    seq->push_back(nn::ReLU());
    c /= 2;
  }
  seq->push_back(conv(c, 3, 7, 1, 3, false));
  seq->push_back(nn::Tanh());
  net_ = register_module("net", seq);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor &images, const torch::Tensor &actions) {
  const auto planes = action_planes(actions, config_.num_actions, images.size(2),
                                    images.size(3), images.scalar_type());
  return net_->forward(torch::cat({images, planes}, 1));
}

DiscriminatorImpl::DiscriminatorImpl(const ArchitectureConfig &config) : config_(config) {
  config_.validate();
  nn::Sequential seq;
  int in = 3;
  int c = config.base_width;
  for (int i = 0; i < config.discriminator_layers; ++i) {
    seq->push_back(conv(in, c, 4, 2, 1, true));
    seq->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.01)));
    in = c;
    c *= 2;
  }
  trunk_ = register_module("trunk", seq);
  src_head_ = register_module("src", conv(in, 1, 3, 1, 1, false));
  cls_head_ = register_module(
      "cls", conv(in, config.num_actions, config.discriminator_final_size(), 1, 0, false));
}

DiscriminatorOutput DiscriminatorImpl::forward(const torch::Tensor &images) {
  const auto h = trunk_->forward(images);
  auto src = src_head_->forward(h).mean({1, 2, 3});
  auto cls = cls_head_->forward(h).flatten(1);
  return {src, cls};
}

torch::Tensor action_planes(const torch::Tensor &actions, int num_actions, int64_t height,
                            int64_t width, torch::Dtype dtype) {
  auto onehot = torch::one_hot(actions.to(torch::kLong), num_actions).to(dtype);
  return onehot.view({-1, num_actions, 1, 1}).expand({-1, num_actions, height, width});
}

torch::Tensor images_to_tensor(std::span<const Image> images, const ArchitectureConfig &config) {
  const int S = config.image_size;
  const int top = pad_top(config), left = pad_left(config);
  auto out = torch::full({static_cast<int64_t>(images.size()), 3, S, S}, -1.0f);
  auto acc = out.accessor<float, 4>();
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Image &img = images[n];
    if (img.height != config.source_height || img.width != config.source_width)
      throw ShapeError("generator expects " + std::to_string(config.source_height) + "x" +
                       std::to_string(config.source_width) + " states, got " +
                       std::to_string(img.height) + "x" + std::to_string(img.width));
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < 3; ++c)
          acc[static_cast<int64_t>(n)][c][top + y][left + x] =
              static_cast<float>(img.at(y, x, c)) / 127.5f - 1.0f;
  }
  return out;
}

torch::Tensor image_to_tensor(const Image &image, const ArchitectureConfig &config) {
  return images_to_tensor(std::span<const Image>(&image, 1), config);
}

Image tensor_to_image(const torch::Tensor &chw, const ArchitectureConfig &config) {
  const auto t = chw.detach().to(torch::kCPU, torch::kFloat64).contiguous();
  if (t.dim() != 3 || t.size(0) != 3 || t.size(1) != config.image_size ||
      t.size(2) != config.image_size)
    throw ShapeError("tensor_to_image: unexpected tensor shape");
  const auto acc = t.accessor<double, 3>();
  const int top = pad_top(config), left = pad_left(config);
  Image img(config.source_height, config.source_width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::round((acc[c][top + y][left + x] + 1.0) * 127.5);
        img.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return img;
}

void set_compute_threads(int threads) {
  if (threads > 0)
    torch::set_num_threads(threads);
}

} // namespace rlcf::gan
