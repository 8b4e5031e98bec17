#include "pukf/harness/csv.hpp"

#include <cstdio>

namespace pukf {

namespace {
constexpr const char* kCrlf = "\r\n";
}

std::string format_csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  const Index n = record.est.empty() ? 0 : record.est.front().size();
  out << "time";
  for (Index i = 1; i <= n; ++i) out << ",truth_" << i;
  for (Index i = 1; i <= n; ++i) out << ",est_" << i;
  for (Index i = 1; i <= n; ++i) out << ",err_" << i;
  for (Index i = 1; i <= n; ++i) out << ",sigma_" << i;
  for (Index i = 1; i <= n; ++i) out << ",beta_" << i;
  out << ",cond_full,cond_factor,gate" << kCrlf;

  for (size_t t = 0; t < record.time.size(); ++t) {
    out << format_csv_double(record.time[t]);
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(record.truth[t](i));
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(record.est[t](i));
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(record.err[t](i));
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(record.sigma[t](i));
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(record.beta[t](i));
    out << ',' << format_csv_double(record.cond_full[t]);
    out << ',' << format_csv_double(record.cond_factor[t]);
    out << ',' << record.gate[t] << kCrlf;
  }
}

void write_monte_carlo_csv(std::ostream& out, const MonteCarloReport& report) {
  const Index n = report.state_dim;
  out << "time";
  for (Index i = 1; i <= n; ++i) out << ",sampled_sigma_" << i;
  for (Index i = 1; i <= n; ++i) out << ",filter_sigma_" << i;
  for (Index i = 1; i <= n; ++i) out << ",mean_err_" << i;
  out << kCrlf;

  const std::vector<Vector> sampled = report.sampled_sigma();
  const std::vector<Vector> filter = report.mean_filter_sigma();
  const std::vector<Vector> mean = report.mean_err();
  for (size_t t = 0; t < report.time.size(); ++t) {
    out << format_csv_double(report.time[t]);
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(sampled[t](i));
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(filter[t](i));
    for (Index i = 0; i < n; ++i) out << ',' << format_csv_double(mean[t](i));
    out << kCrlf;
  }
}

}  // namespace pukf
