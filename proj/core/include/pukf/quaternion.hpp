#pragma once

#include <Eigen/Dense>

namespace pukf {

/// Scalar-last unit quaternion. The multiplication convention is chosen so
/// that dcm(a * b) = dcm(a) * dcm(b); composing an error quaternion on the
/// left, q_true = dq (x) q_hat, therefore composes the DCMs the same way.
///
/// Worked example: two 90-degree rotations about z compose as
///   quat_multiply(q90z, q90z) == q180z, and dcm(q90z)*dcm(q90z) == dcm(q180z).
struct Quaternion {
  Eigen::Vector3d vec = Eigen::Vector3d::Zero();
  double scalar = 1.0;

  static Quaternion identity() { return {}; }

  double norm() const { return std::sqrt(vec.squaredNorm() + scalar * scalar); }
  Quaternion normalized() const;
  Quaternion conjugate() const { return {-vec, scalar}; }
};

Quaternion quat_multiply(const Quaternion& a, const Quaternion& b);

/// Direction-cosine matrix of the quaternion (passive rotation).
Eigen::Matrix3d dcm(const Quaternion& q);

/// Normalized first-order error quaternion [0.5 * beta .* dtheta ; 1].
Quaternion small_angle_quat(const Eigen::Vector3d& dtheta, const Eigen::Vector3d& beta);
Quaternion small_angle_quat(const Eigen::Vector3d& dtheta);

Quaternion quat_from_axis_angle(const Eigen::Vector3d& axis, double angle);

/// Exact exponential step: quaternion after rotating at constant rate omega
/// for dt, composed on the left of q.
Quaternion quat_integrate(const Quaternion& q, const Eigen::Vector3d& omega, double dt);

/// Rotation-vector (axis * angle) extraction, inverse of quat_from_axis_angle.
Eigen::Vector3d rotation_vector(const Quaternion& q);

/// Small rotation between two attitudes: rotation vector of q (x) ref^-1.
Eigen::Vector3d attitude_error(const Quaternion& q, const Quaternion& ref);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

}  // namespace pukf
