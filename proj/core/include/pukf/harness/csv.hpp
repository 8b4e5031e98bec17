#pragma once

#include <ostream>
#include <string>

#include "pukf/harness/monte_carlo.hpp"
#include "pukf/harness/runner.hpp"

namespace pukf {

/// RFC-4180 output: UTF-8, CRLF line endings, header row, floating point
/// printed with 17 significant digits so emission is byte-reproducible.

std::string format_csv_double(double v);

/// Columns: time, truth_<i>, est_<i>, err_<i>, sigma_<i>, beta_<i>...,
/// cond_full, cond_factor, gate.
void write_run_csv(std::ostream& out, const RunRecord& record);

/// Columns: time, sampled_sigma_<i>, filter_sigma_<i>, mean_err_<i>.
void write_monte_carlo_csv(std::ostream& out, const MonteCarloReport& report);

}  // namespace pukf
