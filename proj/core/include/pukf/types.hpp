#pragma once

#include <variant>

#include <Eigen/Dense>

namespace pukf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Modified-Cholesky factors of a covariance: P = U diag(d) U^T with U unit
/// upper triangular and d >= 0.
struct UdFactors {
  Matrix U;
  Vector d;

  Matrix reconstruct() const { return U * d.asDiagonal() * U.transpose(); }
  Index dim() const { return U.rows(); }
};

/// Lower-triangular square root of a covariance: P = S S^T.
struct SqrtFactor {
  Matrix S;

  Matrix reconstruct() const { return S * S.transpose(); }
  Index dim() const { return S.rows(); }
};

enum class CovForm { Full, SquareRoot, Ud };

/// A covariance in one of the three interchangeable representations.
using Covariance = std::variant<Matrix, SqrtFactor, UdFactors>;

CovForm covariance_form(const Covariance& cov);
Index covariance_dim(const Covariance& cov);
Matrix covariance_matrix(const Covariance& cov);
Covariance convert_covariance(const Covariance& cov, CovForm target);

/// State mean plus covariance in any representation.
struct GaussianBelief {
  Vector mean;
  Covariance cov;
};

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);
Matrix symmetrized(const Matrix& m);

}  // namespace pukf
