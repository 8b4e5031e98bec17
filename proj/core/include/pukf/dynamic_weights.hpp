#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pukf/types.hpp"
#include "pukf/weights.hpp"

namespace pukf {

/// Online beta selection from second-order EKF terms. The DNL method compares
/// the net second-order state contribution Y against the first-order Kalman
/// correction Z; the DC method compares second-order covariance terms N
/// against the first-order covariance decrement delta P.

enum class WeightMode { Static, Dnl, Dc };

struct WeightPolicy {
  WeightMode mode = WeightMode::Static;
  Vector beta;                    // static weights, or baseline when set below
  std::optional<Vector> baseline; // pre-tuned baseline for dnl/dc
  Vector sigma0;                  // initial standard deviations (dnl/dc scale)
};

/// Component i = 0.5 * Tr(Hess_f_i * P).
Vector second_order_state_term(const std::vector<Matrix>& f_hessians, const Matrix& p_post);

/// pi = 0.5 * K * [Tr(D_1 P), ..., Tr(D_m P)]^T.
Vector second_order_meas_term(const std::vector<Matrix>& h_hessians, const Matrix& p_minus,
                              const Matrix& k_gain);

/// Lambda(i,j) = 0.5 * Tr(D_i P D_j P).
Matrix lambda_matrix(const std::vector<Matrix>& h_hessians, const Matrix& p_minus);

/// Gamma_j = min(1, f_r,j |Y_j| / |Z_j|); Y_j = 0 gives a full update,
/// otherwise Z_j = 0 saturates to a consider step. beta = 1 - Gamma.
UpdateWeights dnl_select(const Vector& y_term, const Vector& z_term, const Vector& f_r);

/// f_i = (sigma_k,i / sigma_0,i) * Tr(H P H^T + R) / Tr(R). Serves both
/// methods.
Vector scale_factor(const Vector& sigma_k, const Vector& sigma_0, const Matrix& h,
                    const Matrix& p, const Matrix& r);

/// gamma_j = min(1, f_c,j sqrt(N_jj / deltaP_jj)) with
///   deltaP = P H^T S^{-1} H P,  N = K Lambda (S^{-1} Lambda + I)^{-1} K^T,
///   S = H P H^T + R. deltaP_jj = 0 gives gamma_j = 0.
UpdateWeights dc_select(const Matrix& p_minus, const Matrix& h, const Matrix& r,
                        const Matrix& lambda, const Vector& f_c);

/// beta_eff = beta_base .* (1 - Gamma_dyn).
UpdateWeights apply_baseline(const UpdateWeights& dynamic_w, const Vector& beta_base);

/// Central-difference Hessians of a vector-valued function, symmetrized.
/// Step h_i = 1e-3 * max(1, |x_i|), the balance point between truncation and
/// roundoff for second differences in double precision.
std::vector<Matrix> finite_diff_hessians(const std::function<Vector(const Vector&)>& func,
                                         const Vector& x);

}  // namespace pukf
