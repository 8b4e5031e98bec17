#include "pukf/dynamic_weights.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "pukf/errors.hpp"
#include "pukf/types.hpp"

namespace pukf {

Vector second_order_state_term(const std::vector<Matrix>& f_hessians, const Matrix& p_post) {
  const Index n = static_cast<Index>(f_hessians.size());
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) out(i) = 0.5 * (f_hessians[i] * p_post).trace();
  return out;
}

Vector second_order_meas_term(const std::vector<Matrix>& h_hessians, const Matrix& p_minus,
                              const Matrix& k_gain) {
  const Index m = static_cast<Index>(h_hessians.size());
  Vector traces(m);
  for (Index i = 0; i < m; ++i) traces(i) = (h_hessians[i] * p_minus).trace();
  return 0.5 * k_gain * traces;
}

Matrix lambda_matrix(const std::vector<Matrix>& h_hessians, const Matrix& p_minus) {
  const Index m = static_cast<Index>(h_hessians.size());
  Matrix lam(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i; j < m; ++j) {
      const double v = 0.5 * (h_hessians[i] * p_minus * h_hessians[j] * p_minus).trace();
      lam(i, j) = v;
      lam(j, i) = v;
    }
  }
  return lam;
}

UpdateWeights dnl_select(const Vector& y_term, const Vector& z_term, const Vector& f_r) {
  const Index n = y_term.size();
  Vector beta(n);
  for (Index i = 0; i < n; ++i) {
    double gamma;
    const double ay = std::abs(y_term(i));
    const double az = std::abs(z_term(i));
    if (ay == 0.0) gamma = 0.0;
    else if (az == 0.0) gamma = 1.0;
    else gamma = std::min(1.0, f_r(i) * ay / az);
    beta(i) = 1.0 - gamma;
  }
  return UpdateWeights(beta);
}

Vector scale_factor(const Vector& sigma_k, const Vector& sigma_0, const Matrix& h,
                    const Matrix& p, const Matrix& r) {
  const double tr_r = r.trace();
  if (!(tr_r > 0.0)) throw NonPositiveNoise("scale_factor: Tr(R) <= 0");
  const double ratio = (h * p * h.transpose() + r).trace() / tr_r;
  Vector f(sigma_k.size());
  for (Index i = 0; i < sigma_k.size(); ++i) {
    if (!(sigma_0(i) > 0.0)) throw FilterError("scale_factor: sigma_0 <= 0");
    f(i) = sigma_k(i) / sigma_0(i) * ratio;
  }
  return f;
}

UpdateWeights dc_select(const Matrix& p_minus, const Matrix& h, const Matrix& r,
                        const Matrix& lambda, const Vector& f_c) {
  const Matrix innov = symmetrized(h * p_minus * h.transpose() + r);
  Eigen::LLT<Matrix> llt(innov);
  if (llt.info() != Eigen::Success)
    throw SingularInnovation("dc_select: innovation covariance not invertible");

  const Matrix ph_t = p_minus * h.transpose();
  const Matrix k_gain = llt.solve(ph_t.transpose()).transpose();
  const Matrix delta_p = ph_t * llt.solve(ph_t.transpose());

  const Index m = innov.rows();
  const Matrix bracket = llt.solve(lambda) + Matrix::Identity(m, m);
  const Matrix n_mat = k_gain * lambda * bracket.inverse() * k_gain.transpose();

  const Index n = p_minus.rows();
  Vector beta(n);
  for (Index j = 0; j < n; ++j) {
    double gamma;
    const double dpjj = delta_p(j, j);
    if (dpjj <= 0.0) gamma = 0.0;
    else gamma = std::min(1.0, f_c(j) * std::sqrt(std::max(0.0, n_mat(j, j)) / dpjj));
    beta(j) = 1.0 - gamma;
  }
  return UpdateWeights(beta);
}

UpdateWeights apply_baseline(const UpdateWeights& dynamic_w, const Vector& beta_base) {
  const Vector gamma_dyn = dynamic_w.gamma();
  Vector beta(beta_base.size());
  for (Index j = 0; j < beta.size(); ++j) {
    if (!(beta_base(j) >= 0.0 && beta_base(j) <= 1.0))
      throw WeightOutOfRange("apply_baseline: baseline outside [0,1]");
    beta(j) = beta_base(j) * (1.0 - gamma_dyn(j));
  }
  return UpdateWeights(beta);
}

std::vector<Matrix> finite_diff_hessians(const std::function<Vector(const Vector&)>& func,
                                         const Vector& x) {
  const Index n = x.size();
  const Vector f0 = func(x);
  const Index m = f0.size();

  // Step balances truncation against roundoff for second differences; a
  // much smaller step floors the result at eps/h^2 noise.
  Vector step(n);
  for (Index i = 0; i < n; ++i) step(i) = 1e-3 * std::max(1.0, std::abs(x(i)));

  std::vector<Matrix> hess(m, Matrix::Zero(n, n));
  for (Index i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += step(i);
    xm(i) -= step(i);
    const Vector fpp = func(xp);
    const Vector fmm = func(xm);
    for (Index c = 0; c < m; ++c)
      hess[c](i, i) = (fpp(c) - 2.0 * f0(c) + fmm(c)) / (step(i) * step(i));

    for (Index j = i + 1; j < n; ++j) {
      Vector xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += step(i); xpp(j) += step(j);
      xpm(i) += step(i); xpm(j) -= step(j);
      xmp(i) -= step(i); xmp(j) += step(j);
      xmm(i) -= step(i); xmm(j) -= step(j);
      const Vector v = (func(xpp) - func(xpm) - func(xmp) + func(xmm)) /
                       (4.0 * step(i) * step(j));
      for (Index c = 0; c < m; ++c) {
        hess[c](i, j) = v(c);
        hess[c](j, i) = v(c);
      }
    }
  }
  return hess;
}

}  // namespace pukf
