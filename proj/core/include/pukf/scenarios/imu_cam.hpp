#pragma once

#include <cstdint>
#include <vector>

#include "pukf/mekf.hpp"
#include "pukf/quaternion.hpp"
#include "pukf/types.hpp"

namespace pukf {

/// IMU-camera extrinsic calibration: a 23-element full state (two quaternion
/// blocks) with a 21-element error state, driven by synthesized gyro/accel
/// streams and pinhole observations of a known 16-landmark marker wall.
///
/// Error-state ordering: [dtheta, dp, dv, dbg, dba, dlever, dalpha], 3 each.
struct ImuCamParams {
  double imu_rate = 100.0;  // Hz
  double cam_rate = 20.0;   // Hz, must divide imu_rate evenly
  double duration = 60.0;   // s

  // Intrinsics derived from a 58 x 45 degree FOV at 640x480 (not measured
  // constants): f = half_res / tan(half_fov).
  double fx = 577.295;
  double fy = 579.411;
  double cx = 320.0;
  double cy = 240.0;
  int res_x = 640;
  int res_y = 480;
  double pixel_sigma = 2.0;  // px

  // Initial 1-sigma uncertainties.
  double imu_att_sigma = 2.0 * M_PI / 180.0;  // rad
  double imu_pos_sigma = 0.05;                // m
  double vel_sigma = 0.05;                    // m/s
  double gyro_bias_sigma = 0.005;             // rad/s
  double accel_bias_sigma = 0.05;             // m/s^2
  double lever_sigma = 0.05;                  // m
  double ext_att_sigma = 2.0 * M_PI / 180.0;  // rad

  // Continuous IMU noise densities (simulation values, not a datasheet;
  // consumer-MEMS grade so the propagation genuinely leans on the camera).
  double gyro_noise = 1.5e-3;   // rad/s/sqrt(Hz)
  double accel_noise = 2.5e-2;  // m/s^2/sqrt(Hz)
  double gyro_walk = 2e-6;      // rad/s^2/sqrt(Hz)
  double accel_walk = 2e-5;     // m/s^3/sqrt(Hz)

  // World frame: x right, y down, z toward the marker wall.
  Eigen::Vector3d gravity{0.0, 9.81, 0.0};
  double wall_distance = 1.2;   // m
  double marker_side = 0.2;     // m, four squares, corners are the landmarks
  double marker_offset = 0.20;  // m, square centers at (+-offset, +-offset)

  Eigen::Vector3d lever_truth{0.05, -0.03, 0.02};
  Eigen::Vector3d ext_rotvec_truth{0.02, -0.03, 0.01};

  // Scales of the two-sinusoid excitation (1 = the built-in amplitudes).
  double translation_scale = 0.5;
  double rotation_scale = 1.0;

  double draw_scale = 1.0;  // initial estimate offset = scale * sigma * signs
};

/// Full (total-state) snapshot used for truth and for initializing the filter.
struct ImuCamState {
  Quaternion q_wi;          // world -> IMU
  Eigen::Vector3d p = Eigen::Vector3d::Zero();   // IMU position in world
  Eigen::Vector3d v = Eigen::Vector3d::Zero();   // IMU velocity in world
  Eigen::Vector3d bg = Eigen::Vector3d::Zero();  // gyro bias
  Eigen::Vector3d ba = Eigen::Vector3d::Zero();  // accel bias
  Eigen::Vector3d p_ic = Eigen::Vector3d::Zero();  // camera position in IMU frame
  Quaternion q_ic;          // IMU -> camera
};

inline constexpr Index kImuCamErrorDim = 21;
inline constexpr Index kImuCamNoiseDim = 12;

std::vector<Eigen::Vector3d> imu_cam_landmarks(const ImuCamParams& params);

/// Continuous error-state Jacobian (21 x 21) at the current estimate.
Matrix imu_cam_error_f(const Quaternion& q_wi, const Eigen::Vector3d& omega_hat,
                       const Eigen::Vector3d& sf_hat);

/// Noise map (21 x 12) for w = [n_g, n_a, n_wg, n_wa].
Matrix imu_cam_error_g(const Quaternion& q_wi);

/// Continuous process noise density (12 x 12).
Matrix imu_cam_qc(const ImuCamParams& params);

struct ImuCamProjection {
  Matrix h;                      // (2v x 21) stacked rows, visible features only
  Vector y_hat;                  // (2v) predicted pixels
  std::vector<int> feature_ids;  // v entries
};

/// Predicted pixels and stacked chain-rule Jacobian for the requested
/// landmarks (all 16 when ids is empty). Features behind the camera or
/// outside the image are excluded; throws NoVisibleFeatures when none
/// remain.
ImuCamProjection imu_cam_measurement_model(const ImuCamParams& params,
                                           const ImuCamState& est,
                                           const std::vector<Eigen::Vector3d>& landmarks,
                                           const std::vector<int>& ids = {});

/// One mean-propagation step shared by the truth synthesis and the filter:
/// ZOH attitude, Euler velocity, trapezoidal position; biases and extrinsics
/// are constant. omega/sf are the bias-corrected body-rate and specific
/// force.
void imu_cam_mean_propagate(ImuCamState& s, const Eigen::Vector3d& omega,
                            const Eigen::Vector3d& sf, const Eigen::Vector3d& gravity,
                            double dt);

/// Builds the seven-block MekfState for this scenario with the standard
/// initial covariance, in the requested covariance form.
MekfState make_imu_cam_filter_state(const ImuCamParams& params, const ImuCamState& init,
                                    CovForm form);

ImuCamState imu_cam_state_from_mekf(const MekfState& s);

struct ImuCamFrame {
  int imu_index;                 // grid point the frame coincides with
  std::vector<int> feature_ids;  // features actually observed
  std::vector<Eigen::Vector2d> pixels;
};

struct ImuCamStream {
  double imu_dt = 0.0;
  std::vector<Eigen::Vector3d> gyro;   // sample k drives [t_k, t_k + dt)
  std::vector<Eigen::Vector3d> accel;
  std::vector<ImuCamState> truth;      // per IMU grid point (n_steps + 1)
  std::vector<ImuCamFrame> frames;
  std::vector<Eigen::Vector3d> landmarks;
  ImuCamState init_estimate;
};

/// Smooth two-sinusoid 6-DOF trajectory; the IMU samples are
/// increment-consistent, so the noise-free stream integrates back to the
/// stored truth exactly under ZOH attitude, Euler velocity, and trapezoidal
/// position rules.
ImuCamStream imu_cam_truth(const ImuCamParams& params, std::uint64_t seed);

}  // namespace pukf
