#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dvl/image.hpp"

namespace dvl {

/// Raw PNG samples, unnormalized.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

RawImage read_png_raw(const std::filesystem::path& path);
void write_png_raw(const std::filesystem::path& path, const RawImage& raw);

/// 8- or 16-bit gray/RGB PNG normalized to [0, 1]; alpha is dropped.
ImageBuffer load_image_png(const std::filesystem::path& path);
/// Values are clamped to [0, 1] and rounded to the nearest code.
void save_image_png(const std::filesystem::path& path, const ImageBuffer& img, int bit_depth = 8);

/// Default 16-bit depth scale: 1/5000 m per unit.
inline constexpr double kDefaultDepthScale = 1.0 / 5000.0;

/// 16-bit depth PNG; zero marks invalid pixels.
DepthMap load_depth_png(const std::filesystem::path& path, double meters_per_unit = kDefaultDepthScale);
void save_depth_png(const std::filesystem::path& path, const DepthMap& depth, double meters_per_unit = kDefaultDepthScale);

/// Rounds an image onto the code grid a PNG of the given depth can store.
ImageBuffer quantized(const ImageBuffer& img, int bit_depth);
/// Rounds depth onto the 16-bit grid; values outside (0, 65535] units become invalid.
DepthMap quantized(const DepthMap& depth, double meters_per_unit);

}  // namespace dvl
