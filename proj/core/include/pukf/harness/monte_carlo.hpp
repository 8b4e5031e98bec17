#pragma once

#include <cstdint>

#include "pukf/harness/runner.hpp"

namespace pukf {

/// Per-time-step aggregates over a seeded campaign. The raw sums are kept so
/// partial reports over disjoint run ranges merge into exactly the monolithic
/// computation.
struct MonteCarloReport {
  std::vector<double> time;
  Index state_dim = 0;
  int run_count = 0;
  int divergence_count = 0;
  std::uint64_t base_seed = 0;

  std::vector<Vector> sum_err;
  std::vector<Vector> sum_err_sq;
  std::vector<Vector> sum_filter_sigma;

  /// Sampled standard deviation of the errors, (n-1)-normalized.
  std::vector<Vector> sampled_sigma() const;
  std::vector<Vector> mean_filter_sigma() const;
  std::vector<Vector> mean_err() const;
};

/// Runs n_runs seeded runs (run i uses base_seed + i) on up to `jobs`
/// threads; the aggregation is reduced in run order, so the report is
/// independent of scheduling. Throws InvalidRunCount for n_runs < 1.
MonteCarloReport monte_carlo(const ScenarioConfig& cfg, FilterVariant variant,
                             const WeightSpec& weights, int n_runs,
                             std::uint64_t base_seed, int jobs = 1);

/// Merges reports over consecutive run ranges (a's runs precede b's).
MonteCarloReport merge_reports(const MonteCarloReport& a, const MonteCarloReport& b);

struct ConsistencySummary {
  Vector sigma_ratio;  // time-averaged sampled/filter sigma, final third
  Vector err_zscore;   // time-averaged mean error in sampled-sigma units
};

ConsistencySummary consistency_stats(const MonteCarloReport& report);

}  // namespace pukf
