#include "pukf/sqrt_filter.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"

namespace pukf {

Matrix sr_propagate(const Matrix& s_plus, const Matrix& f, const Matrix& q_sqrt_t) {
  const Index n = s_plus.rows();
  if (q_sqrt_t.size() > 0 && q_sqrt_t.cols() != n)
    throw FilterError("sr_propagate: noise factor width mismatch");
  const Index r = q_sqrt_t.rows();
  Matrix stack(n + r, n);
  stack.topRows(n) = (f * s_plus).transpose();
  if (r > 0) stack.bottomRows(r) = q_sqrt_t;
  return mgs_triangularize(stack).transpose();
}

PotterUpdate potter_scalar_update(const Matrix& s_minus, const Vector& x_minus,
                                  const Vector& h_row, double r, double y,
                                  double y_hat) {
  if (!(r > 0.0)) throw NonPositiveNoise("potter_scalar_update: R <= 0");
  PotterUpdate out;
  out.phi = s_minus.transpose() * h_row;
  out.a = 1.0 / (out.phi.squaredNorm() + r);
  out.b = 1.0 / (1.0 + std::sqrt(out.a * r));
  out.K = out.a * (s_minus * out.phi);
  const Index n = x_minus.size();
  out.S = s_minus * (Matrix::Identity(n, n) - (out.a * out.b) * (out.phi * out.phi.transpose()));
  out.x = x_minus + out.K * (y - y_hat);
  return out;
}

SrPartialUpdate sr_partial_update_scalar(const Matrix& s_minus, const Matrix& s_plus,
                                         double a, const Vector& phi,
                                         const UpdateWeights& w,
                                         const Vector& x_minus, const Vector& x_plus) {
  const Index n = x_minus.size();
  const Vector gamma = w.gamma();

  Matrix stack(n + 1, n);
  stack.topRows(n) = s_plus.transpose();
  stack.bottomRows(1) =
      (std::sqrt(a) * (phi.transpose() * s_minus.transpose())).cwiseProduct(gamma.transpose());

  SrPartialUpdate out;
  out.S = mgs_triangularize(stack).transpose();
  out.x = Vector(n);
  for (Index i = 0; i < n; ++i) {
    if (gamma(i) == 1.0) out.x(i) = x_minus(i);
    else if (gamma(i) == 0.0) out.x(i) = x_plus(i);
    else out.x(i) = gamma(i) * x_minus(i) + (1.0 - gamma(i)) * x_plus(i);
  }
  return out;
}

SrVectorCovUpdate sr_vector_cov_update(const Matrix& s_minus, const Matrix& h,
                                       const Matrix& r, const UpdateWeights& w) {
  const Index n = s_minus.rows();
  const Index m = h.rows();

  const Matrix hs = h * s_minus;                       // m x n
  const Matrix innov = symmetrized(hs * hs.transpose() + r);
  Eigen::LLT<Matrix> llt(innov);
  if (llt.info() != Eigen::Success)
    throw SingularInnovation("sr_vector_cov_update: innovation covariance not invertible");

  const Matrix hp = hs * s_minus.transpose();          // H P^-
  SrVectorCovUpdate out;
  out.K = llt.solve(hp).transpose();

  // Conventional factor from the augmented pre-array; the full QR gives the
  // zero (2,1) block and a triangular posterior factor in one pass.
  const Matrix r_sqrt_t = cholesky_lower(r).transpose();
  Matrix pre = Matrix::Zero(m + n, m + n);
  pre.topLeftCorner(m, m) = r_sqrt_t;
  pre.bottomLeftCorner(n, m) = s_minus.transpose() * h.transpose();
  pre.bottomRightCorner(n, n) = s_minus.transpose();
  const Matrix post = mgs_triangularize(pre);
  out.S_plus = post.bottomRightCorner(n, n).transpose();

  // Partial-update stack rows: Rt^{T/2} H P^- Gamma with Rt^{T/2} = L^{-1}
  // for the innovation Cholesky factor L.
  const Matrix whitened = llt.matrixL().solve(hp);     // m x n
  Matrix stack(n + m, n);
  stack.topRows(n) = out.S_plus.transpose();
  stack.bottomRows(m) = whitened * w.gamma().asDiagonal();
  out.S = mgs_triangularize(stack).transpose();
  return out;
}

SrPartialUpdate sr_vector_update(const Matrix& s_minus, const Vector& x_minus,
                                 const Matrix& h, const Matrix& r, const Vector& y,
                                 const Vector& y_hat, const UpdateWeights& w) {
  const SrVectorCovUpdate cov = sr_vector_cov_update(s_minus, h, r, w);
  const Vector x_plus = x_minus + cov.K * (y - y_hat);
  const Vector gamma = w.gamma();

  SrPartialUpdate out;
  out.S = cov.S;
  out.x = Vector(x_minus.size());
  for (Index i = 0; i < x_minus.size(); ++i) {
    if (gamma(i) == 1.0) out.x(i) = x_minus(i);
    else if (gamma(i) == 0.0) out.x(i) = x_plus(i);
    else out.x(i) = gamma(i) * x_minus(i) + (1.0 - gamma(i)) * x_plus(i);
  }
  return out;
}

}  // namespace pukf
