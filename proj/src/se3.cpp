#include "dvl/se3.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace dvl {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kNearPiBranch = 1e-3;
constexpr double kNearPiFlag = 1e-6;
constexpr double kDriftTolerance = 1e-12;

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

}  // namespace

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Mat3 exp_so3(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + w + 0.5 * w * w;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * w + b * w * w;
}

SO3Log log_so3(const Mat3& rotation) {
  const Vec3 axis_sin = 0.5 * vee(rotation - rotation.transpose());  // sin(theta) * n
  const double cos_theta = std::clamp(0.5 * (rotation.trace() - 1.0), -1.0, 1.0);
  const double sin_theta = axis_sin.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  SO3Log out;
  out.near_pi = std::abs(theta - std::numbers::pi) < kNearPiFlag;

  if (theta < kSmallAngle) {
    out.omega = axis_sin;
    return out;
  }
  if (std::numbers::pi - theta > kNearPiBranch) {
    out.omega = (theta / sin_theta) * axis_sin;
    return out;
  }

  // Near pi: (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) n n^T.
  const Mat3 sym = 0.5 * (rotation + rotation.transpose()) - cos_theta * Mat3::Identity();
  Eigen::Index k = 0;
  sym.diagonal().maxCoeff(&k);
  Vec3 n = sym.col(k) / std::sqrt(std::max(sym(k, k), 1e-300));
  n.normalize();
  if (n.dot(axis_sin) < 0.0) n = -n;
  out.omega = theta * n;
  return out;
}

Mat3 left_jacobian_so3(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() + a * w + b * w * w;
}

Mat3 left_jacobian_so3_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  double c = 0.0;
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    c = 1.0 / (theta * theta) - std::cos(half) / (2.0 * theta * std::sin(half));
  }
  return Mat3::Identity() - 0.5 * w + c * w * w;
}

Pose exp_se3(const Twist& xi) {
  const Vec3 v = xi.head<3>();
  const Vec3 omega = xi.tail<3>();
  Pose out;
  out.rotation = exp_so3(omega);
  out.translation = left_jacobian_so3(omega) * v;
  return out;
}

SE3Log log_se3_checked(const Pose& pose) {
  const SO3Log rot = log_so3(pose.rotation);
  SE3Log out;
  out.near_pi = rot.near_pi;
  out.xi.head<3>() = left_jacobian_so3_inverse(rot.omega) * pose.translation;
  out.xi.tail<3>() = rot.omega;
  return out;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (orthonormality_error(out.rotation) > kDriftTolerance) {
    out = orthonormalized(out);
  }
  return out;
}

Pose inverse(const Pose& pose) {
  Pose out;
  out.rotation = pose.rotation.transpose();
  out.translation = -(out.rotation * pose.translation);
  return out;
}

Vec3 act(const Pose& pose, const Vec3& p) { return pose.rotation * p + pose.translation; }

Mat36 point_pose_jacobian(const Pose& pose, const Vec3& p) {
  Mat36 j;
  j.leftCols<3>().setIdentity();
  j.rightCols<3>() = -skew(act(pose, p));
  return j;
}

double rotation_angle(const Pose& pose) { return log_so3(pose.rotation).omega.norm(); }

Pose orthonormalized(const Pose& pose) {
  Eigen::JacobiSVD<Mat3> svd(pose.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Pose out = pose;
  out.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  return out;
}

double orthonormality_error(const Mat3& rotation) {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho + std::abs(rotation.determinant() - 1.0);
}

Eigen::Vector4d rotation_to_quaternion_xyzw(const Mat3& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {q.x(), q.y(), q.z(), q.w()};
}

Mat3 quaternion_xyzw_to_rotation(const Eigen::Vector4d& q) {
  Eigen::Quaterniond quat(q[3], q[0], q[1], q[2]);
  quat.normalize();
  return quat.toRotationMatrix();
}

}  // namespace dvl
