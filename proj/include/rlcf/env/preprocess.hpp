#pragma once

#include <deque>
#include <span>
#include <vector>

#include "rlcf/core/image.hpp"

namespace rlcf {

// Single-channel frame, values in [0,1], row-major.
struct GrayFrame {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  float at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  friend bool operator==(const GrayFrame &, const GrayFrame &) = default;
};

// Four stacked preprocessed frames, oldest first, newest last.
struct AgentObservation {
  static constexpr int frames = 4;
  int height = 0;
  int width = 0;
  std::vector<float> data; // frames * height * width

  std::span<const float> slice(int i) const {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    return {data.data() + static_cast<std::size_t>(i) * n, n};
  }
  GrayFrame newest() const;

  friend bool operator==(const AgentObservation &,
                         const AgentObservation &) = default;
};

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// Pixel-wise maximum of two frames of equal shape.
Image deflicker(const Image &current, const Image &previous);
RawFrame deflicker(const RawFrame &current, const RawFrame &previous);

// Crops a sub-rectangle (x, y, width, height).
Image crop(const Image &image, int x, int y, int width, int height);

// Luminance grayscale, in 0..255 units.
std::vector<double> grayscale(const Image &image);

// Area resampling of a single-channel image: each output pixel is the mean of
// the input region it covers, with fractional edge weights.
std::vector<double> area_resize(std::span<const double> src, int src_h,
                                int src_w, int dst_h, int dst_w);

// Grayscale, area-downsample to out_h x out_w, divide by 255.
GrayFrame preprocess(const Image &frame, int out_h, int out_w);

// Stacks the most recent 4 frames (oldest -> newest); shorter histories
// repeat their earliest frame at the front.
AgentObservation stack(std::span<const GrayFrame> history);

// Observation used to re-evaluate an agent on a single (generated) frame.
AgentObservation lift(const Image &state, int out_h, int out_w);

// Rolling window of preprocessed frames for a live episode.
class FrameHistory {
public:
  void clear() { frames_.clear(); }
  void push(GrayFrame frame);
  bool empty() const noexcept { return frames_.empty(); }
  AgentObservation observation() const;

private:
  std::deque<GrayFrame> frames_;
};

} // namespace rlcf
