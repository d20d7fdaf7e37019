#include "rlcf/core/png.hpp"

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <png.h>

namespace rlcf::png {
namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto *out = static_cast<std::vector<std::uint8_t> *>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void flush_noop(png_structp) {}

void read_from_cursor(png_structp png, png_bytep data, png_size_t len) {
  auto *cur = static_cast<ReadCursor *>(png_get_io_ptr(png));
  if (cur->offset + len > cur->bytes.size())
    png_error(png, "truncated stream");
  std::memcpy(data, cur->bytes.data() + cur->offset, len);
  cur->offset += len;
}

void silent_warning(png_structp, png_const_charp) {}

// libpng reports errors via longjmp; nothing with a non-trivial destructor
// may live between setjmp and the libpng calls below.
bool encode_rows(const Image &image, std::vector<std::uint8_t> &out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, silent_warning);
  if (!png)
    return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
  for (int y = 0; y < image.height; ++y)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + y * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

bool decode_rows(ReadCursor &cursor, Image &image) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, silent_warning);
  if (!png)
    return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &cursor, read_from_cursor);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16)
    png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA)
    png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  const std::size_t stride = static_cast<std::size_t>(w) * 3;
  if (w == 0 || h == 0 || png_get_rowbytes(png, info) != stride)
    png_error(png, "unsupported layout");
  image.height = static_cast<int>(h);
  image.width = static_cast<int>(w);
  image.pixels.resize(stride * h);
  for (png_uint_32 y = 0; y < h; ++y)
    png_read_row(png, image.pixels.data() + y * stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

} // namespace

std::vector<std::uint8_t> encode(const Image &image) {
  if (image.empty())
    throw ShapeError("png: cannot encode an empty image");
  std::vector<std::uint8_t> out;
  if (!encode_rows(image, out))
    throw std::runtime_error("png: encoding failed");
  return out;
}

Image decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw std::runtime_error("png: bad signature");
  ReadCursor cursor{bytes, 0};
  Image image;
  if (!decode_rows(cursor, image))
    throw std::runtime_error("png: malformed stream");
  return image;
}

void write_file(const std::string &path, const Image &image) {
  const auto bytes = encode(image);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("png: cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Image read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("png: cannot read " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode(bytes);
}

} // namespace rlcf::png
