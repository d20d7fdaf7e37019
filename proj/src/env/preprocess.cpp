#include "rlcf/env/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace rlcf {

GrayFrame AgentObservation::newest() const {
  GrayFrame f{height, width, {}};
  auto s = slice(frames - 1);
  f.values.assign(s.begin(), s.end());
  return f;
}

Image deflicker(const Image &current, const Image &previous) {
  require_same_shape(current, previous, "deflicker");
  Image out = current;
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = std::max(current.pixels[i], previous.pixels[i]);
  return out;
}

RawFrame deflicker(const RawFrame &current, const RawFrame &previous) {
  return {deflicker(current.pixels, previous.pixels), current.step_index};
}

Image crop(const Image &image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width <= 0 || height <= 0 || x + width > image.width ||
      y + height > image.height)
    throw ShapeError("crop rectangle outside image");
  if (x == 0 && y == 0 && width == image.width && height == image.height)
    return image;
  Image out(height, width);
  for (int r = 0; r < height; ++r)
    std::copy_n(image.pixels.begin() + image.index(y + r, x, 0),
                static_cast<std::size_t>(width) * Image::channels,
                out.pixels.begin() + out.index(r, 0, 0));
  return out;
}

std::vector<double> grayscale(const Image &image) {
  std::vector<double> g(static_cast<std::size_t>(image.height) * image.width);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto *p = image.pixels.data() + i * 3;
    g[i] = kLumaR * p[0] + kLumaG * p[1] + kLumaB * p[2];
  }
  return g;
}

namespace {

// weights[o] = list of (input index, overlap length) for output cell o.
struct AxisWeights {
  std::vector<std::vector<std::pair<int, double>>> taps;
  double scale = 1.0;
};

AxisWeights axis_weights(int src, int dst) {
  AxisWeights w;
  w.scale = static_cast<double>(src) / dst;
  w.taps.resize(static_cast<std::size_t>(dst));
  for (int o = 0; o < dst; ++o) {
    const double lo = o * w.scale;
    const double hi = (o + 1) * w.scale;
    for (int i = static_cast<int>(std::floor(lo)); i < src && i < hi; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, double(i));
      if (overlap > 1e-12)
        w.taps[o].emplace_back(i, overlap);
    }
  }
  return w;
}

} // namespace

std::vector<double> area_resize(std::span<const double> src, int src_h,
                                int src_w, int dst_h, int dst_w) {
  if (src_h <= 0 || src_w <= 0 || dst_h <= 0 || dst_w <= 0 ||
      src.size() != static_cast<std::size_t>(src_h) * src_w)
    throw ShapeError("area_resize: bad dimensions");
  const AxisWeights wy = axis_weights(src_h, dst_h);
  const AxisWeights wx = axis_weights(src_w, dst_w);
  // rows first, then columns
  std::vector<double> tmp(static_cast<std::size_t>(dst_h) * src_w, 0.0);
  for (int o = 0; o < dst_h; ++o)
    for (const auto &[i, wgt] : wy.taps[o])
      for (int x = 0; x < src_w; ++x)
        tmp[o * src_w + x] += wgt * src[i * src_w + x];
  std::vector<double> out(static_cast<std::size_t>(dst_h) * dst_w, 0.0);
  const double norm = 1.0 / (wy.scale * wx.scale);
  for (int y = 0; y < dst_h; ++y)
    for (int o = 0; o < dst_w; ++o) {
      double acc = 0.0;
      for (const auto &[i, wgt] : wx.taps[o])
        acc += wgt * tmp[y * src_w + i];
      out[y * dst_w + o] = acc * norm;
    }
  return out;
}

GrayFrame preprocess(const Image &frame, int out_h, int out_w) {
  if (frame.empty())
    throw ShapeError("preprocess: empty frame");
  const auto gray = grayscale(frame);
  const auto small = area_resize(gray, frame.height, frame.width, out_h, out_w);
  GrayFrame f{out_h, out_w, std::vector<float>(small.size())};
  for (std::size_t i = 0; i < small.size(); ++i)
    f.values[i] = static_cast<float>(std::clamp(small[i] / 255.0, 0.0, 1.0));
  return f;
}

AgentObservation stack(std::span<const GrayFrame> history) {
  if (history.empty())
    throw std::invalid_argument("stack: empty frame history");
  const std::size_t n = history.size();
  const GrayFrame &first = history.front();
  AgentObservation obs{first.height, first.width, {}};
  const std::size_t plane = static_cast<std::size_t>(first.height) * first.width;
  obs.data.reserve(plane * AgentObservation::frames);
  // take the newest 4, padding the front with the earliest available frame
  const std::size_t begin = n > 4 ? n - 4 : 0;
  const std::size_t pad = n >= 4 ? 0 : 4 - n;
  for (std::size_t k = 0; k < 4; ++k) {
    const GrayFrame &f = k < pad ? history[begin] : history[begin + k - pad];
    if (f.height != first.height || f.width != first.width ||
        f.values.size() != plane)
      throw ShapeError("stack: frames differ in shape");
    obs.data.insert(obs.data.end(), f.values.begin(), f.values.end());
  }
  return obs;
}

AgentObservation lift(const Image &state, int out_h, int out_w) {
  const GrayFrame f = preprocess(state, out_h, out_w);
  const GrayFrame one[] = {f};
  return stack(one);
}

void FrameHistory::push(GrayFrame frame) {
  frames_.push_back(std::move(frame));
  while (frames_.size() > 4)
    frames_.pop_front();
}

AgentObservation FrameHistory::observation() const {
  std::vector<GrayFrame> v(frames_.begin(), frames_.end());
  return stack(v);
}

} // namespace rlcf
