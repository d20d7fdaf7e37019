#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace rlcf {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// Content hash used for sample ids and the image store: first 16 hex digits
// of the SHA-256 digest.
std::string content_id(std::span<const std::uint8_t> bytes);
std::string content_id(std::string_view text);

std::string file_sha256_hex(const std::string &path);

} // namespace rlcf
