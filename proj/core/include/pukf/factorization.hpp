#pragma once

#include <utility>

#include "pukf/types.hpp"

namespace pukf {

/// Lower-triangular Cholesky factor L with L L^T = P.
/// Throws NotPositiveDefinite when a pivot is <= 0; never clamps.
Matrix cholesky_lower(const Matrix& p);

/// Modified-Cholesky (UDU^T) factors of a symmetric PSD matrix, eliminating
/// from the bottom-right corner. Pivots in [-tol, 0] are clamped to zero;
/// anything more negative throws NotPositiveSemiDefinite.
UdFactors udu_decompose(const Matrix& p, double tol = 1e-10);

/// M = V D^{1/2} from the eigendecomposition Q = V D V^T, so M M^T = Q.
/// Eigenvalues in [-tol, 0] are clamped; below that throws NegativeEigenvalue.
Matrix symmetric_sqrt(const Matrix& q, double tol = 1e-10);

/// Triangular factor of a tall matrix: returns upper-triangular W (n x n)
/// with W^T W = M^T M and non-negative diagonal, via one pass of modified
/// Gram-Schmidt on the columns of M ((n+r) x n). Rank-deficient columns
/// produce zero rows; callers decide what that means.
Matrix mgs_triangularize(const Matrix& m);

/// Weighted modified Gram-Schmidt: given W (n x (n+q)) whose rows are w_k and
/// non-negative weights dhat, returns (U, dbar) with
/// U diag(dbar) U^T = W diag(dhat) W^T, U unit upper triangular.
/// A zero weighted norm yields u(k,j) = 0 and a zero dbar entry.
UdFactors wmgs(const Matrix& w, const Vector& dhat);

/// sigma_max / sigma_min; +infinity when sigma_min == 0.
double condition_number(const Matrix& m);

struct DecorrelatedMeasurement {
  Matrix H;
  Vector r;
};

/// Whitens a correlated measurement with the Cholesky factor of R:
/// H_z = S_R^{-1} H, r_z = S_R^{-1} r, transformed noise covariance = I.
DecorrelatedMeasurement decorrelate_cholesky(const Matrix& r_cov, const Matrix& h,
                                             const Vector& residual);

struct UdDecorrelatedMeasurement {
  Matrix H;
  Vector r;
  Vector d_r;  // transformed noise covariance, diagonal
};

/// Diagonalizes a correlated measurement with the UD factors of R_c:
/// H_z = U_r^{-1} H, r_z = U_r^{-1} r, noise covariance = diag(d_r).
UdDecorrelatedMeasurement decorrelate_ud(const Matrix& r_cov, const Matrix& h,
                                         const Vector& residual);

}  // namespace pukf
