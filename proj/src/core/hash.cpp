#include "rlcf/core/hash.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

#include <openssl/evp.h>

namespace rlcf {
namespace {

std::string digest_hex(const void *data, std::size_t len) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  if (EVP_Digest(data, len, md.data(), &md_len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(md_len * 2);
  for (unsigned int i = 0; i < md_len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

} // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  return digest_hex(bytes.data(), bytes.size());
}

std::string sha256_hex(std::string_view text) {
  return digest_hex(text.data(), text.size());
}

std::string content_id(std::span<const std::uint8_t> bytes) {
  return sha256_hex(bytes).substr(0, 16);
}

std::string content_id(std::string_view text) {
  return sha256_hex(text).substr(0, 16);
}

std::string file_sha256_hex(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  return digest_hex(buf.data(), buf.size());
}

} // namespace rlcf
