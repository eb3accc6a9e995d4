#pragma once

#include <Eigen/Core>
#include <optional>

#include "dvl/se3.hpp"

namespace dvl {

using Vec2 = Eigen::Vector2d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Points closer than this to the camera plane are not projectable.
inline constexpr double kMinDepth = 1e-9;
inline constexpr double kMinDisparity = 1e-9;

/// Pinhole intrinsics. Integer pixel coordinates address pixel centres; the
/// image domain is [0, width-1] x [0, height-1].
struct CameraIntrinsics {
  double fu = 0.0;
  double fv = 0.0;
  double cu = 0.0;
  double cv = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const;
  bool contains(const Vec2& pixel) const;
  /// Intrinsics of the next pyramid level (half resolution, floored size).
  CameraIntrinsics halved() const;
  CameraIntrinsics scaled_to_level(int level) const;
};

struct StereoModel {
  CameraIntrinsics intrinsics;
  double baseline = 0.0;  // meters
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

/// Throws NonPositiveDepth when p_z <= kMinDepth.
Projection project(const CameraIntrinsics& k, const Vec3& p);
/// Non-throwing variant for hot loops.
std::optional<Projection> try_project(const CameraIntrinsics& k, const Vec3& p);

/// Throws NonPositiveDepth or OutOfBounds.
Vec3 backproject(const CameraIntrinsics& k, const Vec2& pixel, double depth);
/// No bounds check; depth must already be valid.
inline Vec3 backproject_unchecked(const CameraIntrinsics& k, const Vec2& pixel, double depth) {
  return depth * Vec3((pixel.x() - k.cu) / k.fu, (pixel.y() - k.cv) / k.fv, 1.0);
}

struct StereoProjection {
  Vec2 pixel;
  double disparity = 0.0;
};

StereoProjection project_stereo(const StereoModel& s, const Vec3& p);
Vec3 backproject_stereo(const StereoModel& s, const Vec2& pixel, double disparity);
double disparity_to_depth(const StereoModel& s, double disparity);

/// d project / d p: [[fu/z, 0, -fu x/z^2], [0, fv/z, -fv y/z^2]].
Mat23 projection_jacobian(const CameraIntrinsics& k, const Vec3& p);
inline Mat23 projection_jacobian_unchecked(const CameraIntrinsics& k, const Vec3& p) {
  const double iz = 1.0 / p.z();
  Mat23 j;
  j << k.fu * iz, 0.0, -k.fu * p.x() * iz * iz,
       0.0, k.fv * iz, -k.fv * p.y() * iz * iz;
  return j;
}

/// d backproject / d depth at a pixel: ((u-cu)/fu, (v-cv)/fv, 1).
Vec3 backprojection_depth_jacobian(const CameraIntrinsics& k, const Vec2& pixel);

}  // namespace dvl
