#include "pukf/scenarios/imu_cam.hpp"

#include <cmath>

#include "pukf/errors.hpp"
#include "pukf/sim/rng.hpp"

namespace pukf {

namespace {

constexpr Index kTheta = 0;
constexpr Index kPos = 3;
constexpr Index kVel = 6;
constexpr Index kBg = 9;
constexpr Index kBa = 12;
constexpr Index kLever = 15;
constexpr Index kAlpha = 18;

Eigen::Vector3d truth_position(double t, double scale) {
  return scale * Eigen::Vector3d{0.20 * std::sin(0.9 * t) + 0.10 * std::sin(1.7 * t),
                                 0.15 * std::sin(1.1 * t) + 0.10 * std::sin(2.3 * t),
                                 0.15 * std::sin(0.7 * t) + 0.08 * std::sin(1.9 * t)};
}

Eigen::Vector3d truth_velocity(double t, double scale) {
  return scale * Eigen::Vector3d{0.20 * 0.9 * std::cos(0.9 * t) + 0.10 * 1.7 * std::cos(1.7 * t),
                                 0.15 * 1.1 * std::cos(1.1 * t) + 0.10 * 2.3 * std::cos(2.3 * t),
                                 0.15 * 0.7 * std::cos(0.7 * t) + 0.08 * 1.9 * std::cos(1.9 * t)};
}

Eigen::Vector3d truth_omega(double t, double scale) {
  return scale * Eigen::Vector3d{0.12 * 0.8 * std::cos(0.8 * t),
                                 0.15 * 1.3 * std::cos(1.3 * t + 0.5),
                                 0.20 * 1.1 * std::cos(1.1 * t + 1.0)};
}

}  // namespace

std::vector<Eigen::Vector3d> imu_cam_landmarks(const ImuCamParams& p) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(16);
  const double half = 0.5 * p.marker_side;
  for (double mx : {-p.marker_offset, p.marker_offset}) {
    for (double my : {-p.marker_offset, p.marker_offset}) {
      for (double sx : {-half, half}) {
        for (double sy : {-half, half}) {
          out.emplace_back(mx + sx, my + sy, p.wall_distance);
        }
      }
    }
  }
  return out;
}

Matrix imu_cam_error_f(const Quaternion& q_wi, const Eigen::Vector3d& omega_hat,
                       const Eigen::Vector3d& sf_hat) {
  Matrix f = Matrix::Zero(kImuCamErrorDim, kImuCamErrorDim);
  const Eigen::Matrix3d c_wi_t = dcm(q_wi).transpose();
  f.block<3, 3>(kTheta, kTheta) = -skew(omega_hat);
  f.block<3, 3>(kTheta, kBg) = -Eigen::Matrix3d::Identity();
  f.block<3, 3>(kPos, kVel) = Eigen::Matrix3d::Identity();
  f.block<3, 3>(kVel, kTheta) = -c_wi_t * skew(sf_hat);
  f.block<3, 3>(kVel, kBa) = -c_wi_t;
  return f;
}

Matrix imu_cam_error_g(const Quaternion& q_wi) {
  Matrix g = Matrix::Zero(kImuCamErrorDim, kImuCamNoiseDim);
  g.block<3, 3>(kTheta, 0) = -Eigen::Matrix3d::Identity();
  g.block<3, 3>(kVel, 3) = -dcm(q_wi).transpose();
  g.block<3, 3>(kBg, 6) = Eigen::Matrix3d::Identity();
  g.block<3, 3>(kBa, 9) = Eigen::Matrix3d::Identity();
  return g;
}

Matrix imu_cam_qc(const ImuCamParams& p) {
  Vector q(kImuCamNoiseDim);
  q << Vector::Constant(3, p.gyro_noise * p.gyro_noise),
      Vector::Constant(3, p.accel_noise * p.accel_noise),
      Vector::Constant(3, p.gyro_walk * p.gyro_walk),
      Vector::Constant(3, p.accel_walk * p.accel_walk);
  return q.asDiagonal();
}

ImuCamProjection imu_cam_measurement_model(const ImuCamParams& params,
                                           const ImuCamState& est,
                                           const std::vector<Eigen::Vector3d>& landmarks,
                                           const std::vector<int>& ids) {
  const Eigen::Matrix3d c_wi = dcm(est.q_wi);
  const Eigen::Matrix3d c_ic = dcm(est.q_ic);

  std::vector<int> wanted = ids;
  if (wanted.empty()) {
    wanted.resize(landmarks.size());
    for (size_t i = 0; i < landmarks.size(); ++i) wanted[i] = static_cast<int>(i);
  }

  std::vector<int> visible;
  std::vector<Eigen::Vector2d> pixels;
  std::vector<Matrix> rows;
  for (int id : wanted) {
    const Eigen::Vector3d in_imu = c_wi * (landmarks[id] - est.p);
    const Eigen::Vector3d pc = c_ic * (in_imu - est.p_ic);
    if (pc.z() <= 1e-6) continue;
    const double u = params.fx * pc.x() / pc.z() + params.cx;
    const double v = params.fy * pc.y() / pc.z() + params.cy;
    if (u < 0.0 || u > params.res_x || v < 0.0 || v > params.res_y) continue;

    Eigen::Matrix<double, 2, 3> d_pix;
    d_pix << params.fx, 0.0, -params.fx * pc.x() / pc.z(),
             0.0, params.fy, -params.fy * pc.y() / pc.z();
    d_pix /= pc.z();

    Matrix d_state = Matrix::Zero(3, kImuCamErrorDim);
    d_state.block<3, 3>(0, kTheta) = c_ic * skew(in_imu);
    d_state.block<3, 3>(0, kPos) = -c_ic * c_wi;
    d_state.block<3, 3>(0, kLever) = -c_ic;
    d_state.block<3, 3>(0, kAlpha) = skew(pc);

    visible.push_back(id);
    pixels.emplace_back(u, v);
    rows.push_back(d_pix * d_state);
  }
  if (visible.empty()) throw NoVisibleFeatures("imu_cam_measurement_model: no features project");

  ImuCamProjection out;
  out.feature_ids = visible;
  out.h = Matrix(2 * static_cast<Index>(visible.size()), kImuCamErrorDim);
  out.y_hat = Vector(2 * static_cast<Index>(visible.size()));
  for (size_t i = 0; i < visible.size(); ++i) {
    out.h.middleRows(2 * static_cast<Index>(i), 2) = rows[i];
    out.y_hat(2 * i) = pixels[i].x();
    out.y_hat(2 * i + 1) = pixels[i].y();
  }
  return out;
}

void imu_cam_mean_propagate(ImuCamState& s, const Eigen::Vector3d& omega,
                            const Eigen::Vector3d& sf, const Eigen::Vector3d& gravity,
                            double dt) {
  const Eigen::Vector3d v_new = s.v + (dcm(s.q_wi).transpose() * sf + gravity) * dt;
  s.p += 0.5 * (s.v + v_new) * dt;
  s.v = v_new;
  s.q_wi = quat_integrate(s.q_wi, omega, dt);
}

MekfState make_imu_cam_filter_state(const ImuCamParams& p, const ImuCamState& init,
                                    CovForm form) {
  MekfState s;
  s.add_quaternion_block("imu_attitude", init.q_wi);
  s.add_additive_block("position", init.p);
  s.add_additive_block("velocity", init.v);
  s.add_additive_block("gyro_bias", init.bg);
  s.add_additive_block("accel_bias", init.ba);
  s.add_additive_block("lever_arm", init.p_ic);
  s.add_quaternion_block("extrinsic_attitude", init.q_ic);

  Vector var(kImuCamErrorDim);
  var << Vector::Constant(3, p.imu_att_sigma * p.imu_att_sigma),
      Vector::Constant(3, p.imu_pos_sigma * p.imu_pos_sigma),
      Vector::Constant(3, p.vel_sigma * p.vel_sigma),
      Vector::Constant(3, p.gyro_bias_sigma * p.gyro_bias_sigma),
      Vector::Constant(3, p.accel_bias_sigma * p.accel_bias_sigma),
      Vector::Constant(3, p.lever_sigma * p.lever_sigma),
      Vector::Constant(3, p.ext_att_sigma * p.ext_att_sigma);
  const Matrix p0 = var.asDiagonal();
  s.set_covariance(convert_covariance(p0, form));
  return s;
}

ImuCamState imu_cam_state_from_mekf(const MekfState& s) {
  ImuCamState out;
  out.q_wi = s.quaternion(0);
  out.p = s.additive(1);
  out.v = s.additive(2);
  out.bg = s.additive(3);
  out.ba = s.additive(4);
  out.p_ic = s.additive(5);
  out.q_ic = s.quaternion(6);
  return out;
}

ImuCamStream imu_cam_truth(const ImuCamParams& params, std::uint64_t seed) {
  const double dt = 1.0 / params.imu_rate;
  const int n_steps = static_cast<int>(std::llround(params.duration * params.imu_rate));
  const int cam_every = static_cast<int>(std::llround(params.imu_rate / params.cam_rate));

  Rng imu_rng(seed, 0);
  Rng cam_rng(seed, 1);
  Rng init_rng(seed, 2);

  ImuCamStream out;
  out.imu_dt = dt;
  out.landmarks = imu_cam_landmarks(params);
  out.truth.reserve(n_steps + 1);
  out.gyro.reserve(n_steps);
  out.accel.reserve(n_steps);

  ImuCamState x;
  x.q_wi = Quaternion::identity();
  x.p = truth_position(0.0, params.translation_scale);
  x.v = truth_velocity(0.0, params.translation_scale);
  x.p_ic = params.lever_truth;
  x.q_ic = quat_from_axis_angle(params.ext_rotvec_truth.normalized(),
                                params.ext_rotvec_truth.norm());
  out.truth.push_back(x);

  const double sqrt_dt = std::sqrt(dt);
  for (int k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    // Increment-consistent samples: midpoint gyro, finite-difference accel.
    const Eigen::Vector3d omega = truth_omega(t + 0.5 * dt, params.rotation_scale);
    const Eigen::Vector3d v_next = truth_velocity(t + dt, params.translation_scale);
    const Eigen::Vector3d sf = dcm(x.q_wi) * ((v_next - x.v) / dt - params.gravity);

    Eigen::Vector3d ng, na, nwg, nwa;
    for (int i = 0; i < 3; ++i) {
      ng(i) = imu_rng.normal();
      na(i) = imu_rng.normal();
      nwg(i) = imu_rng.normal();
      nwa(i) = imu_rng.normal();
    }
    out.gyro.push_back(omega + x.bg + params.gyro_noise / sqrt_dt * ng);
    out.accel.push_back(sf + x.ba + params.accel_noise / sqrt_dt * na);

    ImuCamState next = x;
    imu_cam_mean_propagate(next, omega, sf, params.gravity, dt);
    next.bg = x.bg + params.gyro_walk * sqrt_dt * nwg;
    next.ba = x.ba + params.accel_walk * sqrt_dt * nwa;
    x = next;
    out.truth.push_back(x);

    if ((k + 1) % cam_every == 0) {
      ImuCamFrame frame;
      frame.imu_index = k + 1;
      ImuCamState truth_now = x;
      try {
        const ImuCamProjection proj =
            imu_cam_measurement_model(params, truth_now, out.landmarks);
        for (size_t i = 0; i < proj.feature_ids.size(); ++i) {
          frame.feature_ids.push_back(proj.feature_ids[i]);
          frame.pixels.emplace_back(
              proj.y_hat(2 * i) + params.pixel_sigma * cam_rng.normal(),
              proj.y_hat(2 * i + 1) + params.pixel_sigma * cam_rng.normal());
        }
      } catch (const NoVisibleFeatures&) {
        // empty frame; the filter simply skips it
      }
      out.frames.push_back(std::move(frame));
    }
  }

  // Drawn initial estimate: sign draws at the configured sigma multiple.
  ImuCamState est = out.truth.front();
  auto draw3 = [&](double sigma) {
    Eigen::Vector3d d;
    for (int i = 0; i < 3; ++i) d(i) = params.draw_scale * sigma * init_rng.sign();
    return d;
  };
  const Eigen::Vector3d dtheta = draw3(params.imu_att_sigma);
  est.q_wi = quat_multiply(quat_from_axis_angle(dtheta.normalized(), dtheta.norm()), est.q_wi)
                 .normalized();
  est.p += draw3(params.imu_pos_sigma);
  est.v += draw3(params.vel_sigma);
  est.bg += draw3(params.gyro_bias_sigma);
  est.ba += draw3(params.accel_bias_sigma);
  est.p_ic += draw3(params.lever_sigma);
  const Eigen::Vector3d dalpha = draw3(params.ext_att_sigma);
  est.q_ic = quat_multiply(quat_from_axis_angle(dalpha.normalized(), dalpha.norm()), est.q_ic)
                 .normalized();
  out.init_estimate = est;
  return out;
}

}  // namespace pukf
