#pragma once

#include <cstdint>

namespace pukf {

/// Deterministic counter-based generator (SplitMix64 over a keyed counter).
/// A (seed, stream) pair fully determines the sequence, and distinct streams
/// derived from the same seed are independent, so per-run and per-signal
/// substreams can be split without coordination. Gaussian variates use the
/// Box-Muller transform written out explicitly instead of
/// std::normal_distribution, whose algorithm varies between standard
/// libraries; output is then identical wherever libm rounds sin/cos/log the
/// same way.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform in (0, 1].
  double uniform();

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double normal();

  /// -1.0 or +1.0 with equal probability.
  double sign();

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace pukf
