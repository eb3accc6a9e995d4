#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dvl/camera.hpp"

namespace dvl {

/// Row-major image, intensities in [0, 1], 1 or 3 interleaved channels.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c = 0) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  bool empty() const { return data.empty(); }
  /// Dimensions consistent and every value finite in [0, 1].
  bool valid() const;

  bool operator==(const ImageBuffer&) const = default;
};

/// Dense per-pixel scalar field with a validity mask.
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> mask;

  ScalarMap() = default;
  ScalarMap(int w, int h)
      : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0), mask(static_cast<size_t>(w) * h, 0) {}

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  bool is_valid(int x, int y) const { return mask[index(x, y)] != 0; }
  double value(int x, int y) const { return data[index(x, y)]; }
  void set(int x, int y, double v) {
    data[index(x, y)] = v;
    mask[index(x, y)] = 1;
  }
  size_t valid_count() const;

  bool operator==(const ScalarMap&) const = default;
};

/// Metric depth in meters.
struct DepthMap : ScalarMap {
  using ScalarMap::ScalarMap;
};

/// Horizontal disparity in pixels.
struct DisparityMap : ScalarMap {
  using ScalarMap::ScalarMap;
};

struct PyramidLevel {
  ImageBuffer image;
  CameraIntrinsics intrinsics;
};

/// Level 0 is full resolution.
struct Pyramid {
  std::vector<PyramidLevel> levels;
};

struct GradientField {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> du;
  std::vector<double> dv;

  double u(int x, int y, int c = 0) const { return du[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double v(int x, int y, int c = 0) const { return dv[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

/// 0.299 R + 0.587 G + 0.114 B. Single-channel input is returned unchanged.
ImageBuffer to_luminance(const ImageBuffer& img);

/// Separable (1,4,6,4,1)/16 blur with mirrored borders.
ImageBuffer binomial_blur(const ImageBuffer& img);

/// Blur, then halve. Each coarse pixel is the mean of the 2x2 blurred block
/// it covers, so its centre sits where CameraIntrinsics::halved() puts it.
ImageBuffer downsample(const ImageBuffer& img);

/// Throws TooManyLevels when the coarsest level would be smaller than 8x8.
Pyramid build_pyramid(const ImageBuffer& img, const CameraIntrinsics& k, int levels);

/// Halves a depth map by averaging inverse depth over fully valid 2x2 blocks.
DepthMap downsample_depth(const DepthMap& depth);

/// Bilinear interpolation; nullopt outside [0, w-1] x [0, h-1].
std::optional<double> sample_bilinear(const ImageBuffer& img, const Vec2& pixel, int channel = 0);

/// Unchecked single-channel bilinear sample for inner loops.
inline double sample_bilinear_unchecked(const ImageBuffer& img, double x, double y) {
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 >= img.width - 1) x0 = img.width - 2;
  if (y0 >= img.height - 1) y0 = img.height - 2;
  const double fx = x - x0;
  const double fy = y - y0;
  const double* row0 = img.data.data() + static_cast<size_t>(y0) * img.width + x0;
  const double* row1 = row0 + img.width;
  const double top = row0[0] + fx * (row0[1] - row0[0]);
  const double bottom = row1[0] + fx * (row1[1] - row1[0]);
  return top + fy * (bottom - top);
}

/// Central differences inside, one-sided on the border. Throws ImageTooSmall
/// below 3x3.
GradientField gradients(const ImageBuffer& img);

/// Row-major indices of interior pixels whose gradient magnitude (max over
/// channels) exceeds the threshold and whose depth is valid.
std::vector<int> select_pixels(const GradientField& grad, const ScalarMap& depth, double threshold);

/// SAD block matching on a rectified pair with parabola sub-pixel refinement,
/// a uniqueness test and a left-right consistency check (1 px).
DisparityMap block_match_disparity(const ImageBuffer& left, const ImageBuffer& right, const StereoModel& stereo,
                                   int window, int max_disp);

/// Converts valid disparities to metric depth.
DepthMap disparity_to_depth_map(const DisparityMap& disparity, const StereoModel& stereo);

}  // namespace dvl
