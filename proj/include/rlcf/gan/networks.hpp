#pragma once

#include <span>

#include <torch/torch.h>

#include "rlcf/core/image.hpp"
#include "rlcf/env/action_space.hpp"
#include "rlcf/gan/config.hpp"

namespace rlcf::gan {

// conv3x3-IN-ReLU-conv3x3-IN with an identity skip.
class ResidualBlockImpl : public torch::nn::Module {
public:
  explicit ResidualBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor &x);

private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResidualBlock);

// Action-conditioned image translator. Input: images in [-1, 1] (N,3,S,S)
// and target labels (N); output has the input's shape, values in [-1, 1].
class GeneratorImpl : public torch::nn::Module {
public:
  explicit GeneratorImpl(const ArchitectureConfig &config);
  torch::Tensor forward(const torch::Tensor &images, const torch::Tensor &actions);
  const ArchitectureConfig &config() const { return config_; }

private:
  ArchitectureConfig config_;
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(Generator);

struct DiscriminatorOutput {
  torch::Tensor src; // (N) mean realism score over patches
  torch::Tensor cls; // (N, k) action logits
};

// Strided patch critic with a realism head and an action-classification head.
class DiscriminatorImpl : public torch::nn::Module {
public:
  explicit DiscriminatorImpl(const ArchitectureConfig &config);
  DiscriminatorOutput forward(const torch::Tensor &images);
  const ArchitectureConfig &config() const { return config_; }

private:
  ArchitectureConfig config_;
  torch::nn::Sequential trunk_{nullptr};
  torch::nn::Conv2d src_head_{nullptr};
  torch::nn::Conv2d cls_head_{nullptr};
};
TORCH_MODULE(Discriminator);

// One-hot labels broadcast to (N, k, H, W).
torch::Tensor action_planes(const torch::Tensor &actions, int num_actions, int64_t height,
                            int64_t width, torch::Dtype dtype);

// 8-bit RGB states -> (N,3,S,S) float in [-1, 1], each state centered on a
// black canvas of side config.image_size.
torch::Tensor images_to_tensor(std::span<const Image> images, const ArchitectureConfig &config);
torch::Tensor image_to_tensor(const Image &image, const ArchitectureConfig &config);
// Inverse of images_to_tensor for one item: crops the padding and rounds.
Image tensor_to_image(const torch::Tensor &chw, const ArchitectureConfig &config);

// Offset of the state inside the padded canvas.
inline int pad_top(const ArchitectureConfig &c) { return (c.image_size - c.source_height) / 2; }
inline int pad_left(const ArchitectureConfig &c) { return (c.image_size - c.source_width) / 2; }

} // namespace rlcf::gan
