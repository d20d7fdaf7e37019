#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlcf/core/image.hpp"

namespace rlcf::png {

// 8-bit RGB, no alpha. Encoding is deterministic for a given image.
std::vector<std::uint8_t> encode(const Image &image);
Image decode(std::span<const std::uint8_t> bytes);

void write_file(const std::string &path, const Image &image);
Image read_file(const std::string &path);

} // namespace rlcf::png
