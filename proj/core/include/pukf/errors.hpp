#pragma once

#include <stdexcept>
#include <string>

namespace pukf {

struct FilterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot was not positive. Signals covariance corruption on the
/// full-covariance path; never repaired silently.
struct NotPositiveDefinite : FilterError {
  using FilterError::FilterError;
};

/// A UD pivot fell below the PSD tolerance.
struct NotPositiveSemiDefinite : FilterError {
  using FilterError::FilterError;
};

/// An eigenvalue of a supposed PSD matrix was materially negative.
struct NegativeEigenvalue : FilterError {
  using FilterError::FilterError;
};

/// The innovation covariance H P H^T + R is not invertible.
struct SingularInnovation : FilterError {
  using FilterError::FilterError;
};

struct NonFiniteState : FilterError {
  using FilterError::FilterError;
};

struct WeightOutOfRange : FilterError {
  using FilterError::FilterError;
};

struct NonPositiveNoise : FilterError {
  using FilterError::FilterError;
};

struct DegenerateCloud : FilterError {
  using FilterError::FilterError;
};

struct NoVisibleFeatures : FilterError {
  using FilterError::FilterError;
};

struct InvalidRunCount : FilterError {
  using FilterError::FilterError;
};

/// Bad user input (CLI flags, config files). Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pukf
