#pragma once

#include <optional>
#include <utility>

#include "pukf/system.hpp"
#include "pukf/types.hpp"
#include "pukf/weights.hpp"

namespace pukf {

/// 0.99 chi-square quantiles for 1..6 degrees of freedom, from standard
/// tables. Configuration constants for residual gating, not model values.
inline constexpr double kChi2Gate99[6] = {6.63, 9.21, 11.34, 13.28, 15.09, 16.81};

struct StateCov {
  Vector x;
  Matrix P;
};

struct GainResult {
  Matrix K;           // n x m
  Matrix innov_cov;   // m x m, H P H^T + R
};

/// Mean through the nonlinear dynamics, covariance through
/// P <- F P F^T + G Q G^T, symmetrized. Throws NonFiniteState if the
/// propagated mean is not finite.
StateCov ekf_propagate(const StateCov& belief, const NonlinearSystem& sys,
                       const Vector& u, int k);

/// Kalman gain and innovation covariance; the inversion is a Cholesky solve.
GainResult kalman_gain(const Matrix& p_minus, const Matrix& h, const Matrix& r);

/// Conventional (I-KH)P or Joseph-form measurement update, symmetrized.
StateCov ekf_update(const StateCov& belief, const NonlinearSystem& sys,
                    const Vector& y, int k, bool joseph = false);

/// Element-wise partial update:
///   x_i^{++} = gamma_i x_i^- + (1-gamma_i) x_i^+
///   P_ij^{++} = gamma_i gamma_j P_ij^- + (1-gamma_i gamma_j) P_ij^+
/// gamma products of exactly 0 or 1 copy the corresponding entry bit-exactly.
StateCov partial_update(const Vector& x_minus, const Vector& x_plus,
                        const Matrix& p_minus, const Matrix& p_plus,
                        const UpdateWeights& w);

struct SchmidtPartition {
  Index core_dim = 0;  // leading block receives the update, trailing block is considered
};

/// Literal Schmidt block update: parameters and P_pp are untouched, the core
/// block and cross terms update with the zero-parameter-gain optimal gain.
StateCov schmidt_update_block(const StateCov& belief, SchmidtPartition part,
                              const Matrix& h_x, const Matrix& h_p, const Matrix& r,
                              const Vector& y, const Vector& y_hat);

/// Accept iff r^T S^{-1} r <= threshold.
bool chi2_gate(const Vector& residual, const Matrix& innov_cov, double threshold);

enum class DecorrelationMethod { Cholesky, Ud };

/// Scalar-at-a-time assimilation of an m-vector measurement with a partial
/// update applied after every scalar step. A non-diagonal R is decorrelated
/// first (Cholesky by default, UD on request). With relinearize on, the
/// measurement row is re-evaluated at the running posterior.
StateCov sequential_update(const StateCov& belief, const NonlinearSystem& sys,
                           const Vector& y, const UpdateWeights& w,
                           bool relinearize = true,
                           DecorrelationMethod decorrelation = DecorrelationMethod::Cholesky,
                           int k = 0);

bool is_diagonal(const Matrix& m, double tol = 0.0);

}  // namespace pukf
