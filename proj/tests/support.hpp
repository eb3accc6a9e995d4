#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the code under test except for plain data types.

#include <Eigen/Geometry>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dvl/camera.hpp"
#include "dvl/image.hpp"
#include "dvl/se3.hpp"

namespace dvl::testing {

inline Eigen::Isometry3d to_isometry(const Pose& p) {
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = p.rotation;
  iso.translation() = p.translation;
  return iso;
}

inline Pose from_isometry(const Eigen::Isometry3d& iso) {
  Pose p;
  p.rotation = iso.linear();
  p.translation = iso.translation();
  return p;
}

/// Random pose built from Eigen's own quaternion machinery.
inline Pose random_pose(std::mt19937_64& rng, double translation_scale = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  Pose p;
  p.rotation = q.toRotationMatrix();
  p.translation = translation_scale * Vec3(n(rng), n(rng), n(rng));
  return p;
}

inline Vec6 random_twist(std::mt19937_64& rng, double max_norm) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> r(0.0, max_norm);
  Vec6 xi;
  for (int i = 0; i < 6; ++i) xi[i] = n(rng);
  return xi.normalized() * r(rng);
}

/// Rodrigues via Eigen::AngleAxis, translation via the closed-form V matrix.
inline Pose exp_oracle(const Vec6& xi) {
  const Vec3 v = xi.head<3>();
  const Vec3 w = xi.tail<3>();
  const double theta = w.norm();
  Pose p;
  if (theta < 1e-12) {
    p.translation = v;
    return p;
  }
  p.rotation = Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
  Eigen::Matrix3d wx;
  wx << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + (1 - std::cos(theta)) / (theta * theta) * wx +
                            (theta - std::sin(theta)) / (theta * theta * theta) * wx * wx;
  p.translation = V * v;
  return p;
}

struct RpeResult {
  double trans_pct = 0.0;
  double rot_deg_per_m = 0.0;
  double tracked_pct = 0.0;
};

/// Straightforward relative pose error over consecutive tracked frames.
inline RpeResult brute_force_rpe(const std::vector<Pose>& est, const std::vector<Pose>& gt,
                                 const std::vector<bool>& tracked) {
  double sum_t = 0.0, sum_r = 0.0, dist = 0.0;
  int prev = -1;
  size_t count = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    if (!tracked[i]) continue;
    ++count;
    if (prev >= 0) {
      const Eigen::Isometry3d de = to_isometry(est[prev]).inverse() * to_isometry(est[i]);
      const Eigen::Isometry3d dg = to_isometry(gt[prev]).inverse() * to_isometry(gt[i]);
      const Eigen::Isometry3d err = dg.inverse() * de;
      sum_t += err.translation().norm();
      sum_r += Eigen::AngleAxisd(err.linear()).angle() * 180.0 / M_PI;
      dist += dg.translation().norm();
    }
    prev = static_cast<int>(i);
  }
  return {100.0 * sum_t / dist, sum_r / dist, 100.0 * static_cast<double>(count) / static_cast<double>(est.size())};
}

/// Smooth band-limited texture on a plane and its analytic gradient.
struct SmoothTexture {
  double operator()(double x, double y) const {
    return 0.5 + 0.12 * std::sin(7.1 * x + 0.3) * std::cos(5.3 * y - 0.2) + 0.08 * std::sin(3.7 * x + 4.9 * y + 1.1) +
           0.05 * std::cos(11.3 * x - 2.1 * y);
  }
  Eigen::Vector2d gradient(double x, double y) const {
    return {0.12 * 7.1 * std::cos(7.1 * x + 0.3) * std::cos(5.3 * y - 0.2) +
                0.08 * 3.7 * std::cos(3.7 * x + 4.9 * y + 1.1) - 0.05 * 11.3 * std::sin(11.3 * x - 2.1 * y),
            -0.12 * 5.3 * std::sin(7.1 * x + 0.3) * std::sin(5.3 * y - 0.2) +
                0.08 * 4.9 * std::cos(3.7 * x + 4.9 * y + 1.1) + 0.05 * 2.1 * std::sin(11.3 * x - 2.1 * y)};
  }
};

/// Image of a textured world plane z = plane_z (world frame), seen by a
/// camera at world_from_camera; depth is exact ray-plane intersection.
struct PlaneRender {
  ImageBuffer image;
  DepthMap depth;
};

inline PlaneRender render_plane(const CameraIntrinsics& k, const Pose& world_from_camera, double plane_z,
                                double texture_scale = 4.0, const SmoothTexture& tex = {}) {
  PlaneRender out{ImageBuffer(k.width, k.height, 1), DepthMap(k.width, k.height)};
  const Eigen::Isometry3d T = to_isometry(world_from_camera);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d ray_cam((x - k.cu) / k.fu, (y - k.cv) / k.fv, 1.0);
      const Eigen::Vector3d dir = T.linear() * ray_cam;
      const Eigen::Vector3d origin = T.translation();
      const double lambda = (plane_z - origin.z()) / dir.z();
      if (!(lambda > 0)) continue;
      const Eigen::Vector3d hit = origin + lambda * dir;
      out.image.at(x, y) = tex(texture_scale * hit.x(), texture_scale * hit.y());
      out.depth.set(x, y, lambda);  // ray_cam has unit z, so lambda is depth
    }
  }
  return out;
}

inline CameraIntrinsics test_intrinsics(int w = 160, int h = 120) {
  CameraIntrinsics k;
  k.fu = 150.0;
  k.fv = 150.0;
  k.cu = (w - 1) / 2.0;
  k.cv = (h - 1) / 2.0;
  k.width = w;
  k.height = h;
  return k;
}

inline double rotation_error_deg(const Pose& a, const Pose& b) {
  return Eigen::AngleAxisd(a.rotation.transpose() * b.rotation).angle() * 180.0 / M_PI;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dvl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dvl::testing
