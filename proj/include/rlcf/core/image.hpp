#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlcf/core/error.hpp"

namespace rlcf {

// Interleaved 8-bit RGB image, row-major (HWC).
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  static constexpr int channels = 3;

  Image() = default;
  Image(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w),
        pixels(static_cast<std::size_t>(h) * w * channels, fill) {
    if (h <= 0 || w <= 0)
      throw ShapeError("image dimensions must be positive");
  }

  std::size_t size() const noexcept { return pixels.size(); }
  bool empty() const noexcept { return pixels.empty(); }

  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t &at(int y, int x, int c) { return pixels[index(y, x, c)]; }
  std::uint8_t at(int y, int x, int c) const { return pixels[index(y, x, c)]; }

  bool same_shape(const Image &other) const noexcept {
    return height == other.height && width == other.width;
  }

  friend bool operator==(const Image &, const Image &) = default;
};

inline void require_same_shape(const Image &a, const Image &b,
                               const char *what) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": image shapes differ (" +
                     std::to_string(a.height) + "x" + std::to_string(a.width) +
                     " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width) + ")");
}

// Raw frame as produced by the renderer, before flicker correction.
struct RawFrame {
  Image pixels;
  std::uint64_t step_index = 0;
};

// Cropped, flicker-corrected RGB frame shown to humans and fed to the GAN.
struct StateImage {
  Image pixels;
  std::string env_id;
  int episode = 0;
  int step = 0;
};

} // namespace rlcf
