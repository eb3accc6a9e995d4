#pragma once

#include <Eigen/Core>

namespace dvl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;

/// Lie-algebra coordinates of SE(3), ordered (v, omega): translational part
/// first (meters), rotational part last (radians).
using Twist = Vec6;

/// Rigid transform. Composition and point action follow the usual
/// convention act(A*B, p) == act(A, act(B, p)).
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
};

Mat3 skew(const Vec3& w);

Mat3 exp_so3(const Vec3& omega);

struct SO3Log {
  Vec3 omega;
  /// Set when the rotation angle is within 1e-6 of pi, where the axis is
  /// only defined up to sign.
  bool near_pi = false;
};
SO3Log log_so3(const Mat3& rotation);

/// Left Jacobian of SO(3); maps v to the translation of exp_se3((v, omega)).
Mat3 left_jacobian_so3(const Vec3& omega);
Mat3 left_jacobian_so3_inverse(const Vec3& omega);

Pose exp_se3(const Twist& xi);

struct SE3Log {
  Twist xi;
  bool near_pi = false;
};
SE3Log log_se3_checked(const Pose& pose);
inline Twist log_se3(const Pose& pose) { return log_se3_checked(pose).xi; }

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& pose);
Vec3 act(const Pose& pose, const Vec3& p);

inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }
inline Vec3 operator*(const Pose& a, const Vec3& p) { return act(a, p); }

/// d act(exp(eps) * pose, p) / d eps at eps = 0, i.e. [I | -skew(pose * p)].
Mat36 point_pose_jacobian(const Pose& pose, const Vec3& p);

/// Rotation angle of the pose in radians, in [0, pi].
double rotation_angle(const Pose& pose);

/// Projects the rotation back onto SO(3) (polar decomposition).
Pose orthonormalized(const Pose& pose);

/// Largest elementwise deviation of R^T R from identity, plus |det R - 1|.
double orthonormality_error(const Mat3& rotation);

/// Unit quaternion stored x, y, z, w.
Eigen::Vector4d rotation_to_quaternion_xyzw(const Mat3& rotation);
Mat3 quaternion_xyzw_to_rotation(const Eigen::Vector4d& q);

}  // namespace dvl
