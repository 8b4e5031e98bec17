#include "pukf/scenarios/tumbler.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "pukf/errors.hpp"
#include "pukf/quaternion.hpp"
#include "pukf/sim/rng.hpp"

namespace pukf {

NonlinearSystem tumbler_model(const TumblerParams& params) {
  const int n_feat = params.n_features;
  const Index n = 3 * n_feat + 3;
  const Index m = 3 * n_feat;
  const double dt = 1.0 / params.frame_rate;

  NonlinearSystem sys;
  sys.state_dim = n;
  sys.meas_dim = m;
  sys.noise_dim = n;
  sys.G = Matrix::Identity(n, n);
  sys.Q = Matrix::Zero(n, n);  // features and rates carry no process noise
  sys.R = params.r_variance * Matrix::Identity(m, m);

  sys.f = [n_feat, dt](const Vector& x, const Vector&, int) {
    const Eigen::Vector3d omega = x.tail<3>();
    const Eigen::Matrix3d step = Eigen::Matrix3d::Identity() + skew(omega) * dt;
    Vector out(x.size());
    for (int i = 0; i < n_feat; ++i)
      out.segment<3>(3 * i) = step * x.segment<3>(3 * i);
    out.tail<3>() = omega;
    return out;
  };
  sys.F = [n_feat, dt, n](const Vector& x, const Vector&, int) {
    const Eigen::Vector3d omega = x.tail<3>();
    const Eigen::Matrix3d step = Eigen::Matrix3d::Identity() + skew(omega) * dt;
    Matrix f = Matrix::Zero(n, n);
    for (int i = 0; i < n_feat; ++i) {
      f.block<3, 3>(3 * i, 3 * i) = step;
      f.block<3, 3>(3 * i, 3 * n_feat) = -skew(x.segment<3>(3 * i)) * dt;
    }
    f.block<3, 3>(3 * n_feat, 3 * n_feat) = Eigen::Matrix3d::Identity();
    return f;
  };
  sys.h = [m](const Vector& x, int) { return Vector(x.head(m)); };
  sys.H = [m, n](const Vector&, int) {
    Matrix h = Matrix::Zero(m, n);
    h.leftCols(m) = Matrix::Identity(m, m);
    return h;
  };
  return sys;
}

TumblerStream tumbler_truth(const TumblerParams& params, std::uint64_t seed) {
  const int n_feat = params.n_features;
  const double dt = 1.0 / params.frame_rate;
  const int n_frames = static_cast<int>(std::llround(params.duration * params.frame_rate));

  Rng cloud_rng(seed, 0);
  Rng noise_rng(seed, 1);

  // Sphere-like cloud: random directions scaled into [0.6, 1] of the radius.
  Matrix cloud(n_feat, 3);
  for (int i = 0; i < n_feat; ++i) {
    Eigen::Vector3d dir;
    do {
      for (int c = 0; c < 3; ++c) dir(c) = cloud_rng.normal();
    } while (dir.norm() < 1e-6);
    const double scale = params.cloud_radius * (0.6 + 0.4 * cloud_rng.uniform());
    cloud.row(i) = (dir.normalized() * scale).transpose();
  }

  const Eigen::Vector3d omega = params.omega_true;
  const double angle = omega.norm() * dt;
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  if (angle > 0.0) {
    const Eigen::Vector3d axis = omega.normalized();
    rot = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  }

  TumblerStream out;
  out.dt = dt;
  out.omega = omega;
  out.times.reserve(n_frames);
  out.truth_features.reserve(n_frames);
  out.measured_features.reserve(n_frames);

  Matrix features = cloud;
  for (int k = 0; k < n_frames; ++k) {
    out.times.push_back(k * dt);
    out.truth_features.push_back(features);
    Matrix measured = features;
    for (int i = 0; i < n_feat; ++i)
      for (int c = 0; c < 3; ++c) measured(i, c) += params.meas_sigma * noise_rng.normal();
    out.measured_features.push_back(measured);
    features = (rot * features.transpose()).transpose();
  }
  return out;
}

RigidAlignment svd_rigid_align(const Matrix& p_cloud, const Matrix& q_cloud) {
  if (p_cloud.rows() < 3 || p_cloud.rows() != q_cloud.rows() || p_cloud.cols() != 3 ||
      q_cloud.cols() != 3)
    throw DegenerateCloud("svd_rigid_align: need at least three paired 3D points");

  const Eigen::Vector3d p_bar = p_cloud.colwise().mean();
  const Eigen::Vector3d q_bar = q_cloud.colwise().mean();
  const Matrix p_c = p_cloud.rowwise() - p_bar.transpose();
  const Matrix q_c = q_cloud.rowwise() - q_bar.transpose();

  const Eigen::Matrix3d cross = p_c.transpose() * q_c;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank < 2 leaves a rotation axis undetermined (collinear cloud).
  if (sv(1) <= 1e-12 * std::max(1.0, sv(0)))
    throw DegenerateCloud("svd_rigid_align: cloud is collinear");

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidAlignment out;
  out.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  out.translation = q_bar - out.rotation * p_bar;
  return out;
}

CoarseRateInit coarse_rate_init(const std::vector<Matrix>& frames, double dt) {
  if (frames.size() < 2) throw DegenerateCloud("coarse_rate_init: need at least two frames");

  std::vector<Eigen::Vector3d> rates;
  rates.reserve(frames.size() - 1);
  for (size_t k = 0; k + 1 < frames.size(); ++k) {
    const RigidAlignment a = svd_rigid_align(frames[k], frames[k + 1]);
    // 3-2-1 Euler increments of the differential rotation.
    const Eigen::Matrix3d& r = a.rotation;
    const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    const double yaw = std::atan2(r(1, 0), r(0, 0));
    const double roll = std::atan2(r(2, 1), r(2, 2));
    rates.emplace_back(roll / dt, pitch / dt, yaw / dt);
  }

  CoarseRateInit out;
  out.omega_mean.setZero();
  for (const auto& w : rates) out.omega_mean += w;
  out.omega_mean /= static_cast<double>(rates.size());

  out.omega_sigma.setZero();
  if (rates.size() > 1) {
    for (const auto& w : rates) {
      const Eigen::Vector3d d = w - out.omega_mean;
      out.omega_sigma += d.cwiseProduct(d);
    }
    out.omega_sigma = (out.omega_sigma / static_cast<double>(rates.size() - 1)).cwiseSqrt();
  }
  return out;
}

TumblerReinitResult tumbler_reinit(const Vector& x, const Matrix& p,
                                   const Matrix& new_features, double fresh_feature_var) {
  const Index n = x.size();
  const Index m = 3 * new_features.rows();
  if (m + 3 != n) throw FilterError("tumbler_reinit: feature count mismatch");

  TumblerReinitResult out;
  out.x = Vector(n);
  for (Index i = 0; i < new_features.rows(); ++i)
    out.x.segment<3>(3 * i) = new_features.row(i).transpose();
  out.x.tail<3>() = x.tail<3>();

  out.P = Matrix::Zero(n, n);
  out.P.topLeftCorner(m, m) = fresh_feature_var * Matrix::Identity(m, m);
  out.P.bottomRightCorner(3, 3) = p.bottomRightCorner(3, 3);
  return out;
}

}  // namespace pukf
