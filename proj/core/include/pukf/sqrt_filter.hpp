#pragma once

#include "pukf/types.hpp"
#include "pukf/weights.hpp"

namespace pukf {

/// Potter-style square-root filter with partial update. The covariance is
/// carried as a lower-triangular factor S with P = S S^T; measurement
/// assimilation is sequential-scalar, re-triangularized by MGS.

/// Time update: S^- from MGS of [(S^+)^T F^T ; Q_sqrt_t] so that
/// S^- S^-T = F S^+ S^+T F^T + Q_sqrt_t^T Q_sqrt_t. Pass the transpose
/// factor of the mapped process noise (r x n, possibly r = 0).
Matrix sr_propagate(const Matrix& s_plus, const Matrix& f, const Matrix& q_sqrt_t);

struct PotterUpdate {
  Vector x;     // conventional posterior mean
  Matrix S;     // S^- (I - a b phi phi^T); non-triangular on purpose
  Vector K;     // a S^- phi
  Vector phi;   // S^-T h^T
  double a = 0.0;
  double b = 0.0;
};

/// One Potter scalar assimilation; the "+" branch of b avoids subtraction.
PotterUpdate potter_scalar_update(const Matrix& s_minus, const Vector& x_minus,
                                  const Vector& h_row, double r, double y,
                                  double y_hat);

struct SrPartialUpdate {
  Vector x;
  Matrix S;  // lower-triangular, canonical non-negative diagonal
};

/// Square-root partial update for one scalar assimilation epoch: MGS of the
/// stack [(S^+)^T ; sqrt(a) phi^T S^-T Gamma] yields S^{++} with
/// S^{++} S^{++T} = Gamma (P^- - P^+) Gamma + P^+.
SrPartialUpdate sr_partial_update_scalar(const Matrix& s_minus, const Matrix& s_plus,
                                         double a, const Vector& phi,
                                         const UpdateWeights& w,
                                         const Vector& x_minus, const Vector& x_plus);

struct SrVectorCovUpdate {
  Matrix K;        // n x m gain
  Matrix S_plus;   // conventional posterior factor (lower-triangular)
  Matrix S;        // partial-updated factor (lower-triangular)
};

/// Batch vector-measurement square-root update: the conventional factor comes
/// from triangularizing the augmented pre-array
///   [ R^{T/2}      0    ]
///   [ S^-T H^T   S^-T  ]
/// and the partial update from a second MGS of [(S^+)^T ; Rt^{T/2} H P^- Gamma]
/// with Rt = (H P^- H^T + R)^{-1}.
SrVectorCovUpdate sr_vector_cov_update(const Matrix& s_minus, const Matrix& h,
                                       const Matrix& r, const UpdateWeights& w);

/// State-and-covariance wrapper around sr_vector_cov_update.
SrPartialUpdate sr_vector_update(const Matrix& s_minus, const Vector& x_minus,
                                 const Matrix& h, const Matrix& r, const Vector& y,
                                 const Vector& y_hat, const UpdateWeights& w);

}  // namespace pukf
