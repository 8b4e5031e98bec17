#pragma once

#include <cstdint>
#include <vector>

#include "pukf/system.hpp"
#include "pukf/types.hpp"

namespace pukf {

/// Tumbling-body angular-rate estimation from direct body-vector
/// measurements: state = 3N feature components + 3 rates, first-order
/// rotation process model. The truth rotates features with the exact matrix
/// exponential; the model mismatch is part of the experiment.
struct TumblerParams {
  int n_features = 12;
  Eigen::Vector3d omega_true{0.0, 0.035, 0.0};  // rad/s
  double frame_rate = 30.0;                     // Hz
  double duration = 60.0;                       // s
  double cloud_radius = 0.4;                    // m
  double meas_sigma = 0.005;                    // m, truth measurement noise
  double r_variance = 0.005;                    // filter R = r_variance * I
  int reinit_threshold = 6;                     // active features below this reinitializes
  int forced_reinit_period = 0;                 // frames; 0 disables
  double drop_cov_factor = 10.0;                // feature inactive past this times initial
  double init_window = 3.0;                     // s of coarse initialization
  double feature_beta = 1.0;
  double rate_beta = 0.05;
  double chi2_threshold = 11.34;                // 0.99 quantile, 3 dof
};

/// Process/measurement bundle for N tracked features.
NonlinearSystem tumbler_model(const TumblerParams& params);

struct TumblerStream {
  double dt = 0.0;
  std::vector<double> times;             // one per frame
  std::vector<Matrix> truth_features;    // N x 3 per frame (exact rotation)
  std::vector<Matrix> measured_features; // N x 3 per frame
  Eigen::Vector3d omega;                 // constant truth rate
};

TumblerStream tumbler_truth(const TumblerParams& params, std::uint64_t seed);

struct RigidAlignment {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
};

/// Least-squares rigid alignment min sum ||R p + t - q||^2 over proper
/// rotations (SVD solution, reflection excluded). Throws DegenerateCloud for
/// fewer than three points or a collinear cloud.
RigidAlignment svd_rigid_align(const Matrix& p_cloud, const Matrix& q_cloud);

struct CoarseRateInit {
  Eigen::Vector3d omega_mean;
  Eigen::Vector3d omega_sigma;  // sample standard deviation
};

/// Frame-to-frame differential-rotation rate estimates: align consecutive
/// clouds, extract 3-2-1 Euler increments, divide by dt, and report the
/// sample mean and sigma.
CoarseRateInit coarse_rate_init(const std::vector<Matrix>& frames, double dt);

struct TumblerReinitResult {
  Vector x;
  Matrix P;
};

/// Filter re-initialization: the rate block and its 3x3 covariance survive,
/// feature blocks are replaced by new_features (N x 3), cross-covariances are
/// zeroed, and each new feature gets an equal fresh covariance.
TumblerReinitResult tumbler_reinit(const Vector& x, const Matrix& p,
                                   const Matrix& new_features, double fresh_feature_var);

}  // namespace pukf
