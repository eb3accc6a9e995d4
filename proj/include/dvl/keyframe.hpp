#pragma once

#include <string>
#include <vector>

#include "dvl/image.hpp"
#include "dvl/png_io.hpp"
#include "dvl/se3.hpp"
#include "dvl/tracker_config.hpp"

namespace dvl {

/// Per-level data precomputed once when a keyframe is created. Vectors
/// beyond `selected` are parallel to it.
struct KeyframeLevel {
  CameraIntrinsics intrinsics;
  ImageBuffer image;
  DepthMap depth;
  GradientField gradient;
  std::vector<int> selected;
  std::vector<Vec3> points;
  std::vector<Vec3> depth_directions;
  std::vector<double> intensities;
  std::vector<Vec2> gradients;
  std::vector<double> depth_sigmas;
};

/// Posed reference frame. `image` (luminance, appearance-transformed) and
/// `depth` are stored on the 16-bit grids the map format persists, so a
/// saved and reloaded keyframe rebuilds identical levels.
struct Keyframe {
  int id = 0;
  Pose pose;  // world from keyframe
  std::string source_frame;
  CameraIntrinsics intrinsics;
  double depth_scale = kDefaultDepthScale;
  ImageBuffer image;
  DepthMap depth;
  std::vector<KeyframeLevel> levels;
};

/// `image` may be RGB; it is converted to luminance. Throws TooManyLevels or
/// DimensionMismatch.
Keyframe make_keyframe(int id, const Pose& world_from_keyframe, const ImageBuffer& image, const DepthMap& depth,
                       const CameraIntrinsics& intrinsics, const TrackerConfig& cfg, std::string source_frame = {},
                       double depth_scale = kDefaultDepthScale);

/// Recomputes `levels` from `image`, `depth` and `intrinsics`.
void rebuild_levels(Keyframe& kf, const TrackerConfig& cfg);

}  // namespace dvl
