#include "dvl/camera.hpp"

#include <string>

#include "dvl/error.hpp"

namespace dvl {

bool CameraIntrinsics::valid() const {
  return fu > 0.0 && fv > 0.0 && width > 0 && height > 0 && cu > 0.0 && cu < width &&
         cv > 0.0 && cv < height;
}

bool CameraIntrinsics::contains(const Vec2& pixel) const {
  return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= width - 1 &&
         pixel.y() <= height - 1;
}

CameraIntrinsics CameraIntrinsics::halved() const {
  CameraIntrinsics out;
  out.fu = fu * 0.5;
  out.fv = fv * 0.5;
  out.cu = (cu + 0.5) * 0.5 - 0.5;
  out.cv = (cv + 0.5) * 0.5 - 0.5;
  out.width = width / 2;
  out.height = height / 2;
  return out;
}

CameraIntrinsics CameraIntrinsics::scaled_to_level(int level) const {
  CameraIntrinsics out = *this;
  for (int i = 0; i < level; ++i) out = out.halved();
  return out;
}

std::optional<Projection> try_project(const CameraIntrinsics& k, const Vec3& p) {
  if (!(p.z() > kMinDepth)) return std::nullopt;
  return Projection{{k.fu * p.x() / p.z() + k.cu, k.fv * p.y() / p.z() + k.cv}, p.z()};
}

Projection project(const CameraIntrinsics& k, const Vec3& p) {
  auto out = try_project(k, p);
  if (!out) throw Error(ErrorCode::NonPositiveDepth, "point depth " + std::to_string(p.z()));
  return *out;
}

Vec3 backproject(const CameraIntrinsics& k, const Vec2& pixel, double depth) {
  if (!(depth > kMinDepth)) throw Error(ErrorCode::NonPositiveDepth, "depth " + std::to_string(depth));
  if (!k.contains(pixel)) throw Error(ErrorCode::OutOfBounds, "pixel outside image");
  return backproject_unchecked(k, pixel, depth);
}

StereoProjection project_stereo(const StereoModel& s, const Vec3& p) {
  const Projection proj = project(s.intrinsics, p);
  return {proj.pixel, s.intrinsics.fu * s.baseline / proj.depth};
}

double disparity_to_depth(const StereoModel& s, double disparity) {
  if (!(disparity > kMinDisparity)) {
    throw Error(ErrorCode::NonPositiveDisparity, "disparity " + std::to_string(disparity));
  }
  return s.intrinsics.fu * s.baseline / disparity;
}

Vec3 backproject_stereo(const StereoModel& s, const Vec2& pixel, double disparity) {
  return backproject(s.intrinsics, pixel, disparity_to_depth(s, disparity));
}

Mat23 projection_jacobian(const CameraIntrinsics& k, const Vec3& p) {
  if (!(p.z() > kMinDepth)) throw Error(ErrorCode::NonPositiveDepth, "point depth " + std::to_string(p.z()));
  return projection_jacobian_unchecked(k, p);
}

Vec3 backprojection_depth_jacobian(const CameraIntrinsics& k, const Vec2& pixel) {
  if (!k.contains(pixel)) throw Error(ErrorCode::OutOfBounds, "pixel outside image");
  return {(pixel.x() - k.cu) / k.fu, (pixel.y() - k.cv) / k.fv, 1.0};
}

}  // namespace dvl
