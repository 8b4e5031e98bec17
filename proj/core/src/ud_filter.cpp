#include "pukf/ud_filter.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"
#include "pukf/filter_core.hpp"

namespace pukf {

UdFactors ud_propagate(const UdFactors& post, const Matrix& f, const Matrix& g,
                       const Matrix& q) {
  const Index n = post.U.rows();
  const Index nq = q.rows();

  Matrix w;
  Vector dhat;
  if (nq == 0) {
    w = f * post.U;
    dhat = post.d;
  } else if (is_diagonal(q)) {
    w.resize(n, n + nq);
    w << f * post.U, g;
    dhat.resize(n + nq);
    dhat << post.d, q.diagonal();
  } else {
    const UdFactors qf = udu_decompose(q);
    w.resize(n, n + nq);
    w << f * post.U, g * qf.U;
    dhat.resize(n + nq);
    dhat << post.d, qf.d;
  }
  return wmgs(w, dhat);
}

UdGain ud_gain(const UdFactors& prior, const Matrix& h, const Matrix& r) {
  UdGain out;
  out.w_bar = prior.U.transpose() * h.transpose();
  const Matrix innov =
      symmetrized(out.w_bar.transpose() * prior.d.asDiagonal() * out.w_bar + r);
  Eigen::LLT<Matrix> llt(innov);
  if (llt.info() != Eigen::Success)
    throw SingularInnovation("ud_gain: innovation covariance not invertible");
  out.A = llt.solve(Matrix::Identity(innov.rows(), innov.cols()));
  out.K = prior.U * prior.d.asDiagonal() * out.w_bar * out.A;
  return out;
}

UdPartialUpdate ud_partial_update(const UdFactors& prior, const UdGain& gain,
                                  const UpdateWeights& w, const Vector& x_minus,
                                  const Vector& residual) {
  const Index n = prior.U.rows();
  const Matrix dw = prior.d.asDiagonal() * gain.w_bar;  // n x m
  const Matrix l = dw * gain.A * dw.transpose();

  Matrix inner = Matrix(prior.d.asDiagonal()) - l;
  const Vector gamma = w.gamma();
  if (!(gamma.array() == 0.0).all()) {
    // Back-substitution against the unit-upper-triangular factor.
    const Matrix gu = prior.U.triangularView<Eigen::Upper>().solve(
        Matrix(gamma.asDiagonal()) * prior.U);
    inner += gu * l * gu.transpose();
  }
  inner = symmetrized(inner);

  const UdFactors inner_f = udu_decompose(inner);

  UdPartialUpdate out;
  out.cov.U = prior.U * inner_f.U;
  out.cov.d = inner_f.d;
  out.x = x_minus;
  const Vector correction = gain.K * residual;
  for (Index i = 0; i < n; ++i) {
    const double beta = 1.0 - gamma(i);
    if (beta != 0.0) out.x(i) += beta * correction(i);
  }
  return out;
}

UdPartialUpdate ud_sequential_update(const UdFactors& prior, const Vector& x_minus,
                                     const NonlinearSystem& sys, const Vector& y,
                                     const UpdateWeights& w, bool relinearize, int k) {
  const Index m = y.size();

  Matrix t = Matrix::Identity(m, m);
  Vector r_diag = sys.R.diagonal();
  if (!is_diagonal(sys.R)) {
    const UdFactors rf = udu_decompose(sys.R);
    t = rf.U.triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
    r_diag = rf.d;
  }

  UdPartialUpdate cur{x_minus, prior};
  const Vector x_lin0 = x_minus;
  for (Index i = 0; i < m; ++i) {
    const Vector& x_lin = relinearize ? cur.x : x_lin0;
    const Matrix h_full = t * sys.H(x_lin, k);
    const Vector y_hat = t * sys.h(cur.x, k);
    const Vector z = t * y;

    if (!(r_diag(i) > 0.0)) throw NonPositiveNoise("ud_sequential_update: scalar noise <= 0");
    const Matrix h_row = h_full.row(i);
    const Matrix r_i = Matrix::Constant(1, 1, r_diag(i));
    const UdGain gain = ud_gain(cur.cov, h_row, r_i);
    const Vector residual = Vector::Constant(1, z(i) - y_hat(i));
    cur = ud_partial_update(cur.cov, gain, w, cur.x, residual);
  }
  return cur;
}

}  // namespace pukf
