#include "pukf/types.hpp"

#include <cmath>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"

namespace pukf {

CovForm covariance_form(const Covariance& cov) {
  if (std::holds_alternative<Matrix>(cov)) return CovForm::Full;
  if (std::holds_alternative<SqrtFactor>(cov)) return CovForm::SquareRoot;
  return CovForm::Ud;
}

Index covariance_dim(const Covariance& cov) {
  return std::visit([](const auto& c) -> Index {
    if constexpr (std::is_same_v<std::decay_t<decltype(c)>, Matrix>) return c.rows();
    else return c.dim();
  }, cov);
}

Matrix covariance_matrix(const Covariance& cov) {
  return std::visit([](const auto& c) -> Matrix {
    if constexpr (std::is_same_v<std::decay_t<decltype(c)>, Matrix>) return c;
    else return c.reconstruct();
  }, cov);
}

Covariance convert_covariance(const Covariance& cov, CovForm target) {
  if (covariance_form(cov) == target) return cov;
  const Matrix p = covariance_matrix(cov);
  switch (target) {
    case CovForm::Full: return p;
    case CovForm::SquareRoot: return SqrtFactor{cholesky_lower(p)};
    case CovForm::Ud: return udu_decompose(p);
  }
  throw FilterError("convert_covariance: unknown form");
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace pukf
