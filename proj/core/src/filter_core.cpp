#include "pukf/filter_core.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"

namespace pukf {

StateCov ekf_propagate(const StateCov& belief, const NonlinearSystem& sys,
                       const Vector& u, int k) {
  StateCov out;
  out.x = sys.f(belief.x, u, k);
  if (!out.x.allFinite()) throw NonFiniteState("ekf_propagate: dynamics produced non-finite state");
  const Matrix f_jac = sys.F(belief.x, u, k);
  out.P = symmetrized(f_jac * belief.P * f_jac.transpose() + sys.G * sys.Q * sys.G.transpose());
  return out;
}

GainResult kalman_gain(const Matrix& p_minus, const Matrix& h, const Matrix& r) {
  GainResult out;
  out.innov_cov = symmetrized(h * p_minus * h.transpose() + r);
  Eigen::LLT<Matrix> llt(out.innov_cov);
  if (llt.info() != Eigen::Success)
    throw SingularInnovation("kalman_gain: innovation covariance not invertible");
  out.K = llt.solve(h * p_minus).transpose();
  return out;
}

StateCov ekf_update(const StateCov& belief, const NonlinearSystem& sys,
                    const Vector& y, int k, bool joseph) {
  const Matrix h = sys.H(belief.x, k);
  const Vector y_hat = sys.h(belief.x, k);
  const GainResult g = kalman_gain(belief.P, h, sys.R);

  StateCov out;
  out.x = belief.x + g.K * (y - y_hat);
  const Index n = belief.x.size();
  if (joseph) {
    const Matrix ikh = Matrix::Identity(n, n) - g.K * h;
    out.P = symmetrized(ikh * belief.P * ikh.transpose() + g.K * sys.R * g.K.transpose());
  } else {
    out.P = symmetrized((Matrix::Identity(n, n) - g.K * h) * belief.P);
  }
  return out;
}

StateCov partial_update(const Vector& x_minus, const Vector& x_plus,
                        const Matrix& p_minus, const Matrix& p_plus,
                        const UpdateWeights& w) {
  const Index n = x_minus.size();
  if (x_plus.size() != n || p_minus.rows() != n || p_plus.rows() != n || w.size() != n)
    throw FilterError("partial_update: dimension mismatch");
  const Vector gamma = w.gamma();

  StateCov out;
  out.x = Vector(n);
  for (Index i = 0; i < n; ++i) {
    if (gamma(i) == 1.0) out.x(i) = x_minus(i);
    else if (gamma(i) == 0.0) out.x(i) = x_plus(i);
    else out.x(i) = gamma(i) * x_minus(i) + (1.0 - gamma(i)) * x_plus(i);
  }
  out.P = Matrix(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double gg = gamma(i) * gamma(j);
      if (gg == 1.0) out.P(i, j) = p_minus(i, j);
      else if (gg == 0.0) out.P(i, j) = p_plus(i, j);
      else out.P(i, j) = gg * p_minus(i, j) + (1.0 - gg) * p_plus(i, j);
    }
  }
  return out;
}

StateCov schmidt_update_block(const StateCov& belief, SchmidtPartition part,
                              const Matrix& h_x, const Matrix& h_p, const Matrix& r,
                              const Vector& y, const Vector& y_hat) {
  const Index nx = part.core_dim;
  const Index np = belief.x.size() - nx;
  if (h_x.cols() != nx || h_p.cols() != np)
    throw FilterError("schmidt_update_block: partition mismatch");

  const Matrix p_xx = belief.P.topLeftCorner(nx, nx);
  const Matrix p_xp = belief.P.topRightCorner(nx, np);
  const Matrix p_pp = belief.P.bottomRightCorner(np, np);

  // Innovation covariance of the full system; the core gain is the optimal
  // gain with the parameter gain forced to zero.
  Matrix h(h_x.rows(), nx + np);
  h << h_x, h_p;
  const Matrix innov = symmetrized(h * belief.P * h.transpose() + r);
  Eigen::LLT<Matrix> llt(innov);
  if (llt.info() != Eigen::Success)
    throw SingularInnovation("schmidt_update_block: innovation covariance not invertible");
  const Matrix k_x = llt.solve(h_x * p_xx.transpose() + h_p * p_xp.transpose()).transpose();

  const Matrix ikh = Matrix::Identity(nx, nx) - k_x * h_x;
  const Matrix new_xx = ikh * p_xx - k_x * h_p * p_xp.transpose();
  const Matrix new_xp = ikh * p_xp - k_x * h_p * p_pp;

  StateCov out;
  out.x = belief.x;
  out.x.head(nx) += k_x * (y - y_hat);
  out.P = belief.P;
  out.P.topLeftCorner(nx, nx) = symmetrized(new_xx);
  out.P.topRightCorner(nx, np) = new_xp;
  out.P.bottomLeftCorner(np, nx) = new_xp.transpose();
  // P_pp stays exactly P_pp^-
  return out;
}

bool chi2_gate(const Vector& residual, const Matrix& innov_cov, double threshold) {
  Eigen::LLT<Matrix> llt(symmetrized(innov_cov));
  if (llt.info() != Eigen::Success)
    throw SingularInnovation("chi2_gate: innovation covariance not invertible");
  const double md2 = residual.dot(llt.solve(residual));
  return md2 <= threshold;
}

bool is_diagonal(const Matrix& m, double tol) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j && std::abs(m(i, j)) > tol) return false;
  return true;
}

StateCov sequential_update(const StateCov& belief, const NonlinearSystem& sys,
                           const Vector& y, const UpdateWeights& w,
                           bool relinearize, DecorrelationMethod decorrelation, int k) {
  const Index m = y.size();
  const Index n = belief.x.size();

  // Work in decorrelated coordinates when R carries correlations. The
  // transform is linear, so the residual transform applies to y and y_hat
  // alike: z - z_hat = T (y - y_hat).
  Matrix t = Matrix::Identity(m, m);
  Vector r_diag = sys.R.diagonal();
  if (!is_diagonal(sys.R)) {
    if (decorrelation == DecorrelationMethod::Cholesky) {
      const Matrix s_r = cholesky_lower(sys.R);
      t = s_r.triangularView<Eigen::Lower>().solve(Matrix::Identity(m, m));
      r_diag = Vector::Ones(m);
    } else {
      const UdFactors f = udu_decompose(sys.R);
      t = f.U.triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
      r_diag = f.d;
    }
  }

  StateCov cur = belief;
  const Vector x_lin0 = belief.x;
  for (Index i = 0; i < m; ++i) {
    const Vector& x_lin = relinearize ? cur.x : x_lin0;
    const Matrix h_full = t * sys.H(x_lin, k);
    const Vector y_hat = t * sys.h(cur.x, k);
    const Vector z = t * y;
    const Vector h_row = h_full.row(i).transpose();

    if (!(r_diag(i) > 0.0)) throw NonPositiveNoise("sequential_update: scalar noise <= 0");
    const double innov_var = h_row.dot(cur.P * h_row) + r_diag(i);
    if (!(innov_var > 0.0)) throw SingularInnovation("sequential_update: scalar innovation <= 0");
    const Vector k = cur.P * h_row / innov_var;
    const Vector x_plus = cur.x + k * (z(i) - y_hat(i));
    const Matrix p_plus =
        symmetrized((Matrix::Identity(n, n) - k * h_row.transpose()) * cur.P);
    cur = partial_update(cur.x, x_plus, cur.P, p_plus, w);
  }
  return cur;
}

}  // namespace pukf
