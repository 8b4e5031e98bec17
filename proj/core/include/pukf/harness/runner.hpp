#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pukf/dynamic_weights.hpp"
#include "pukf/harness/config.hpp"
#include "pukf/types.hpp"

namespace pukf {

enum class FilterVariant { Ekf, Schmidt, Pu, SrPu, UdPu, MekfPu };

FilterVariant parse_filter_variant(const std::string& name);
std::string to_string(FilterVariant variant);

/// Parsed --weights argument: a static beta list, 'dnl', 'dc', or
/// 'dnl:base=<list>' / 'dc:base=<list>'. A one-element static list broadcasts
/// to the scenario's state dimension.
struct WeightSpec {
  WeightMode mode = WeightMode::Static;
  std::optional<Vector> static_beta;  // unset: scenario default
  std::optional<Vector> baseline;
};

WeightSpec parse_weight_spec(const std::string& text);

/// Per-run log. All series share the time axis. For scenarios with
/// quaternion blocks, truth/est log each block as a rotation vector and err
/// is the error-state error.
struct RunRecord {
  std::vector<double> time;
  std::vector<Vector> truth;
  std::vector<Vector> est;
  std::vector<Vector> err;
  std::vector<Vector> sigma;
  std::vector<Vector> beta;
  std::vector<Matrix> cov;  // reconstructed full covariance per row
  std::vector<double> cond_full;
  std::vector<double> cond_factor;
  std::vector<int> gate;  // 1 = everything accepted (or nothing to gate)
  Vector sigma0;
  std::uint64_t seed = 0;
  std::string variant;
  double failed_at = -1.0;  // first in-run numerical failure; record frozen after
};

RunRecord run_scenario(const ScenarioConfig& cfg, FilterVariant variant,
                       const WeightSpec& weights, std::uint64_t seed);

struct DivergenceInfo {
  bool diverged = false;
  double first_time = -1.0;
};

/// Diverged iff any logged state is non-finite, the run failed numerically,
/// or |err_i| > 10 * (3 sigma0_i) persists for 10 consecutive epochs.
DivergenceInfo divergence_detect(const RunRecord& record);

/// Deviations between covariance forms on identical streams. State deviation
/// is normalized per state by the largest magnitude the reference run
/// reaches; covariance deviation is Frobenius-relative per epoch.
struct FormComparison {
  double max_state_dev = 0.0;
  double max_cov_dev = 0.0;
  bool ekf_included = false;       // true when beta == 1 everywhere
  double max_state_dev_vs_ekf = 0.0;
  double max_cov_dev_vs_ekf = 0.0;
};

FormComparison compare_forms(const ScenarioConfig& cfg, const WeightSpec& weights,
                             std::uint64_t seed);

/// The scenario's documented default beta for a variant (static weights).
Vector scenario_default_beta(const ScenarioConfig& cfg, FilterVariant variant);

}  // namespace pukf
