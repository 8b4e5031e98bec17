#include "pukf/factorization.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "pukf/errors.hpp"

namespace pukf {

namespace {

double diag_scale(const Matrix& p) {
  double s = 1.0;
  for (Index i = 0; i < p.rows(); ++i) s = std::max(s, std::abs(p(i, i)));
  return s;
}

}  // namespace

Matrix cholesky_lower(const Matrix& p) {
  if (p.rows() != p.cols()) throw NotPositiveDefinite("cholesky_lower: matrix not square");
  const Index n = p.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = p(j, j);
    for (Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) throw NotPositiveDefinite("cholesky_lower: pivot <= 0");
    l(j, j) = std::sqrt(pivot);
    for (Index i = j + 1; i < n; ++i) {
      double v = p(i, j);
      for (Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

UdFactors udu_decompose(const Matrix& p, double tol) {
  if (p.rows() != p.cols()) throw NotPositiveSemiDefinite("udu_decompose: matrix not square");
  const Index n = p.rows();
  const double thresh = tol * diag_scale(p);

  Matrix a = symmetrized(p);
  UdFactors f;
  f.U = Matrix::Identity(n, n);
  f.d = Vector::Zero(n);

  for (Index j = n - 1; j >= 0; --j) {
    double dj = a(j, j);
    if (dj < -thresh) throw NotPositiveSemiDefinite("udu_decompose: negative pivot");
    if (dj <= 0.0) {
      f.d(j) = 0.0;
      continue;  // column of U stays e_j; nothing to eliminate
    }
    f.d(j) = dj;
    for (Index k = 0; k < j; ++k) f.U(k, j) = a(k, j) / dj;
    for (Index i = 0; i < j; ++i) {
      for (Index k = 0; k <= i; ++k) a(k, i) -= f.U(k, j) * dj * f.U(i, j);
    }
  }
  return f;
}

Matrix symmetric_sqrt(const Matrix& q, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(q));
  if (es.info() != Eigen::Success) throw NegativeEigenvalue("symmetric_sqrt: eigendecomposition failed");
  Vector evals = es.eigenvalues();
  const double thresh = tol * diag_scale(q);
  for (Index i = 0; i < evals.size(); ++i) {
    if (evals(i) < -thresh) throw NegativeEigenvalue("symmetric_sqrt: negative eigenvalue");
    if (evals(i) < 0.0) evals(i) = 0.0;
  }
  return es.eigenvectors() * evals.cwiseSqrt().asDiagonal();
}

Matrix mgs_triangularize(const Matrix& m) {
  const Index n = m.cols();
  Matrix q = m;
  Matrix w = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double nrm = q.col(j).norm();
    w(j, j) = nrm;
    if (nrm <= 0.0) continue;  // rank deficiency: zero row
    q.col(j) /= nrm;
    for (Index k = j + 1; k < n; ++k) {
      const double proj = q.col(j).dot(q.col(k));
      w(j, k) = proj;
      q.col(k) -= proj * q.col(j);
    }
  }
  return w;
}

UdFactors wmgs(const Matrix& w, const Vector& dhat) {
  const Index n = w.rows();
  const Index nq = w.cols();
  if (dhat.size() != nq) throw FilterError("wmgs: weight length mismatch");

  Matrix v = w;  // row k becomes the running residual v_k
  UdFactors out;
  out.U = Matrix::Identity(n, n);
  out.d = Vector::Zero(n);

  // Bottom row is final immediately; rows above are orthogonalized against
  // all finished rows below them in the diag(dhat) inner product.
  for (Index k = n - 1; k >= 0; --k) {
    for (Index j = k + 1; j < n; ++j) {
      const double denom = out.d(j);
      if (denom <= 0.0) {
        out.U(k, j) = 0.0;  // zero weighted norm: PSD limit
        continue;
      }
      double num = 0.0;
      for (Index c = 0; c < nq; ++c) num += v(k, c) * dhat(c) * v(j, c);
      const double coeff = num / denom;
      out.U(k, j) = coeff;
      v.row(k) -= coeff * v.row(j);
    }
    double dk = 0.0;
    for (Index c = 0; c < nq; ++c) dk += v(k, c) * dhat(c) * v(k, c);
    out.d(k) = dk;
  }
  return out;
}

double condition_number(const Matrix& m) {
  if (m.size() == 0) throw FilterError("condition_number: empty matrix");
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

DecorrelatedMeasurement decorrelate_cholesky(const Matrix& r_cov, const Matrix& h,
                                             const Vector& residual) {
  const Matrix s_r = cholesky_lower(r_cov);
  DecorrelatedMeasurement out;
  out.H = s_r.triangularView<Eigen::Lower>().solve(h);
  out.r = s_r.triangularView<Eigen::Lower>().solve(residual);
  return out;
}

UdDecorrelatedMeasurement decorrelate_ud(const Matrix& r_cov, const Matrix& h,
                                         const Vector& residual) {
  const UdFactors f = udu_decompose(r_cov);
  UdDecorrelatedMeasurement out;
  out.H = f.U.triangularView<Eigen::Upper>().solve(h);
  out.r = f.U.triangularView<Eigen::Upper>().solve(residual);
  out.d_r = f.d;
  return out;
}

}  // namespace pukf
