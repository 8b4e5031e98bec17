#include "pukf/quaternion.hpp"

#include <cmath>

namespace pukf {

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {vec / n, scalar / n};
}

Quaternion quat_multiply(const Quaternion& a, const Quaternion& b) {
  Quaternion out;
  out.vec = a.scalar * b.vec + b.scalar * a.vec - a.vec.cross(b.vec);
  out.scalar = a.scalar * b.scalar - a.vec.dot(b.vec);
  return out;
}

Eigen::Matrix3d dcm(const Quaternion& q) {
  const double w = q.scalar;
  const Eigen::Vector3d& v = q.vec;
  return (2.0 * w * w - 1.0) * Eigen::Matrix3d::Identity() - 2.0 * w * skew(v) +
         2.0 * v * v.transpose();
}

Quaternion small_angle_quat(const Eigen::Vector3d& dtheta, const Eigen::Vector3d& beta) {
  Quaternion q{0.5 * beta.cwiseProduct(dtheta), 1.0};
  return q.normalized();
}

Quaternion small_angle_quat(const Eigen::Vector3d& dtheta) {
  return small_angle_quat(dtheta, Eigen::Vector3d::Ones());
}

Quaternion quat_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return Quaternion::identity();
  return {axis / n * std::sin(0.5 * angle), std::cos(0.5 * angle)};
}

Quaternion quat_integrate(const Quaternion& q, const Eigen::Vector3d& omega, double dt) {
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return q;
  const Quaternion step = quat_from_axis_angle(omega, angle);
  return quat_multiply(step, q).normalized();
}

Eigen::Vector3d rotation_vector(const Quaternion& q) {
  Quaternion qn = q.normalized();
  if (qn.scalar < 0.0) qn = {-qn.vec, -qn.scalar};  // take the short rotation
  const double s = qn.vec.norm();
  if (s < 1e-12) return 2.0 * qn.vec;  // small angle: theta ~ 2 v
  const double angle = 2.0 * std::atan2(s, qn.scalar);
  return qn.vec / s * angle;
}

Eigen::Vector3d attitude_error(const Quaternion& q, const Quaternion& ref) {
  return rotation_vector(quat_multiply(q, ref.conjugate()));
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v(2), v(1),
       v(2), 0.0, -v(0),
       -v(1), v(0), 0.0;
  return m;
}

}  // namespace pukf
