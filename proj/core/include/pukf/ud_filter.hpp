#pragma once

#include "pukf/system.hpp"
#include "pukf/types.hpp"
#include "pukf/weights.hpp"

namespace pukf {

/// UD-factorized filter with partial update: P = U diag(d) U^T throughout,
/// WMGS temporal update, gain from factors, and a UD partial update whose
/// Gamma = 0 special case is the conventional UD filter.

/// Temporal update via WMGS of W = [F U^+, G], Dhat = [d^+; diag(Q)].
/// A non-diagonal Q is UD-decomposed first (W = [F U^+, G Uq], tail = dq).
UdFactors ud_propagate(const UdFactors& post, const Matrix& f, const Matrix& g,
                       const Matrix& q);

struct UdGain {
  Matrix K;      // n x m
  Matrix A;      // (w^T D w + R)^{-1}; 1x1 in scalar mode
  Matrix w_bar;  // U^T H^T, n x m
};

/// Gain from factors; no assumption on the measurement dimension.
UdGain ud_gain(const UdFactors& prior, const Matrix& h, const Matrix& r);

struct UdPartialUpdate {
  Vector x;
  UdFactors cov;
};

/// Partial update in factored form:
///   L = (D w) A (D w)^T
///   inner = D - L + U^{-1} Gamma U L U^T Gamma U^{-T}   (symmetrized)
///   (Uc, Dc) = udu(inner);  U^{++} = U Uc, d^{++} = Dc
///   x^{++} = x^- + (I - Gamma) K r
UdPartialUpdate ud_partial_update(const UdFactors& prior, const UdGain& gain,
                                  const UpdateWeights& w, const Vector& x_minus,
                                  const Vector& residual);

/// Scalar-at-a-time assimilation with a partial update per scalar step;
/// a non-diagonal R is UD-decorrelated first. Relinearization policy as in
/// the full-covariance sequential update.
UdPartialUpdate ud_sequential_update(const UdFactors& prior, const Vector& x_minus,
                                     const NonlinearSystem& sys, const Vector& y,
                                     const UpdateWeights& w, bool relinearize = true,
                                     int k = 0);

}  // namespace pukf
