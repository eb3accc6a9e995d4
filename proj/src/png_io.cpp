#include "dvl/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "dvl/error.hpp"

namespace dvl {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void io_fail(const std::filesystem::path& path, const char* what) {
  throw Error(ErrorCode::IoFailure, path.string() + ": " + what);
}

std::uint16_t to_code(double v, int max_code) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * max_code));
}

}  // namespace

RawImage read_png_raw(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) io_fail(path, "cannot open");
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) io_fail(path, "not a PNG");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) io_fail(path, "png_create_read_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    io_fail(path, "png_create_info_struct");
  }

  RawImage raw;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "corrupt or truncated PNG");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host order, little-endian hosts only
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const size_t n = static_cast<size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  if (raw.bit_depth == 16) {
    for (int y = 0; y < raw.height; ++y) {
      const auto* row = reinterpret_cast<const std::uint16_t*>(rows[y]);
      std::copy(row, row + static_cast<size_t>(raw.width) * raw.channels,
                raw.samples.begin() + static_cast<size_t>(y) * raw.width * raw.channels);
    }
  } else {
    for (int y = 0; y < raw.height; ++y) {
      std::copy(rows[y], rows[y] + static_cast<size_t>(raw.width) * raw.channels,
                raw.samples.begin() + static_cast<size_t>(y) * raw.width * raw.channels);
    }
  }
  return raw;
}

void write_png_raw(const std::filesystem::path& path, const RawImage& raw) {
  if (raw.channels != 1 && raw.channels != 3) io_fail(path, "unsupported channel count");
  if (raw.bit_depth != 8 && raw.bit_depth != 16) io_fail(path, "unsupported bit depth");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) io_fail(path, "cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) io_fail(path, "png_create_write_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    io_fail(path, "png_create_info_struct");
  }
  const size_t row_samples = static_cast<size_t>(raw.width) * raw.channels;
  std::vector<png_byte> buffer(row_samples * raw.height * (raw.bit_depth / 8));
  for (size_t i = 0; i < raw.samples.size(); ++i) {
    if (raw.bit_depth == 16) {
      buffer[2 * i] = static_cast<png_byte>(raw.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(raw.samples[i] & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(raw.samples[i]);
    }
  }
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + row_samples * (raw.bit_depth / 8) * y;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    io_fail(path, "write failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth,
               raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) io_fail(path, "flush failed");
}

ImageBuffer load_image_png(const std::filesystem::path& path) {
  const RawImage raw = read_png_raw(path);
  if (raw.channels != 1 && raw.channels != 3) io_fail(path, "unsupported channel layout");
  ImageBuffer img(raw.width, raw.height, raw.channels);
  const double scale = raw.bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (size_t i = 0; i < raw.samples.size(); ++i) img.data[i] = raw.samples[i] * scale;
  return img;
}

void save_image_png(const std::filesystem::path& path, const ImageBuffer& img, int bit_depth) {
  RawImage raw;
  raw.width = img.width;
  raw.height = img.height;
  raw.channels = img.channels;
  raw.bit_depth = bit_depth;
  const int max_code = bit_depth == 16 ? 65535 : 255;
  raw.samples.resize(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i) raw.samples[i] = to_code(img.data[i], max_code);
  write_png_raw(path, raw);
}

DepthMap load_depth_png(const std::filesystem::path& path, double meters_per_unit) {
  const RawImage raw = read_png_raw(path);
  if (raw.channels != 1) io_fail(path, "depth PNG must be single channel");
  DepthMap depth(raw.width, raw.height);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::uint16_t code = raw.samples[static_cast<size_t>(y) * raw.width + x];
      if (code != 0) depth.set(x, y, code * meters_per_unit);
    }
  }
  return depth;
}

void save_depth_png(const std::filesystem::path& path, const DepthMap& depth, double meters_per_unit) {
  RawImage raw;
  raw.width = depth.width;
  raw.height = depth.height;
  raw.channels = 1;
  raw.bit_depth = 16;
  raw.samples.assign(static_cast<size_t>(depth.width) * depth.height, 0);
  for (size_t i = 0; i < raw.samples.size(); ++i) {
    if (!depth.mask[i]) continue;
    const double units = std::round(depth.data[i] / meters_per_unit);
    if (units >= 1.0 && units <= 65535.0) raw.samples[i] = static_cast<std::uint16_t>(units);
  }
  write_png_raw(path, raw);
}

ImageBuffer quantized(const ImageBuffer& img, int bit_depth) {
  const int max_code = bit_depth == 16 ? 65535 : 255;
  ImageBuffer out = img;
  for (double& v : out.data) v = static_cast<double>(to_code(v, max_code)) * (1.0 / max_code);
  return out;
}

DepthMap quantized(const DepthMap& depth, double meters_per_unit) {
  DepthMap out(depth.width, depth.height);
  for (size_t i = 0; i < depth.data.size(); ++i) {
    if (!depth.mask[i]) continue;
    const double units = std::round(depth.data[i] / meters_per_unit);
    if (units >= 1.0 && units <= 65535.0) {
      out.data[i] = units * meters_per_unit;
      out.mask[i] = 1;
    }
  }
  return out;
}

}  // namespace dvl
