#include "pukf/harness/monte_carlo.hpp"

#include <cmath>
#include <mutex>
#include <thread>

#include "pukf/errors.hpp"

namespace pukf {

std::vector<Vector> MonteCarloReport::sampled_sigma() const {
  std::vector<Vector> out(time.size());
  for (size_t t = 0; t < time.size(); ++t) {
    const Vector mean = sum_err[t] / run_count;
    Vector var = (sum_err_sq[t] - run_count * mean.cwiseProduct(mean)) /
                 std::max(1, run_count - 1);
    out[t] = var.cwiseMax(0.0).cwiseSqrt();
  }
  return out;
}

std::vector<Vector> MonteCarloReport::mean_filter_sigma() const {
  std::vector<Vector> out(time.size());
  for (size_t t = 0; t < time.size(); ++t) out[t] = sum_filter_sigma[t] / run_count;
  return out;
}

std::vector<Vector> MonteCarloReport::mean_err() const {
  std::vector<Vector> out(time.size());
  for (size_t t = 0; t < time.size(); ++t) out[t] = sum_err[t] / run_count;
  return out;
}

namespace {

struct RunExtract {
  std::vector<Vector> err;
  std::vector<Vector> sigma;
  std::vector<double> time;
  bool diverged = false;
};

}  // namespace

MonteCarloReport monte_carlo(const ScenarioConfig& cfg, FilterVariant variant,
                             const WeightSpec& weights, int n_runs,
                             std::uint64_t base_seed, int jobs) {
  if (n_runs < 1) throw InvalidRunCount("monte_carlo: n_runs must be >= 1");
  jobs = std::max(1, jobs);

  std::vector<RunExtract> extracts(n_runs);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&](int begin, int stride) {
    for (int i = begin; i < n_runs; i += stride) {
      try {
        const RunRecord rec = run_scenario(cfg, variant, weights, base_seed + i);
        RunExtract& e = extracts[i];
        e.err = rec.err;
        e.sigma = rec.sigma;
        e.time = rec.time;
        e.diverged = divergence_detect(rec).diverged;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker, j, jobs);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  MonteCarloReport report;
  report.base_seed = base_seed;
  report.run_count = n_runs;
  report.time = extracts[0].time;
  report.state_dim = extracts[0].err.front().size();
  const size_t rows = report.time.size();
  report.sum_err.assign(rows, Vector::Zero(report.state_dim));
  report.sum_err_sq.assign(rows, Vector::Zero(report.state_dim));
  report.sum_filter_sigma.assign(rows, Vector::Zero(report.state_dim));

  // Fixed-order reduction: identical output for any thread count.
  for (int i = 0; i < n_runs; ++i) {
    const RunExtract& e = extracts[i];
    if (e.time.size() != rows)
      throw FilterError("monte_carlo: runs disagree on the time axis");
    if (e.diverged) ++report.divergence_count;
    for (size_t t = 0; t < rows; ++t) {
      report.sum_err[t] += e.err[t];
      report.sum_err_sq[t] += e.err[t].cwiseProduct(e.err[t]);
      report.sum_filter_sigma[t] += e.sigma[t];
    }
  }
  return report;
}

MonteCarloReport merge_reports(const MonteCarloReport& a, const MonteCarloReport& b) {
  if (a.time.size() != b.time.size() || a.state_dim != b.state_dim)
    throw FilterError("merge_reports: incompatible reports");
  MonteCarloReport out = a;
  out.run_count += b.run_count;
  out.divergence_count += b.divergence_count;
  for (size_t t = 0; t < out.time.size(); ++t) {
    out.sum_err[t] += b.sum_err[t];
    out.sum_err_sq[t] += b.sum_err_sq[t];
    out.sum_filter_sigma[t] += b.sum_filter_sigma[t];
  }
  return out;
}

ConsistencySummary consistency_stats(const MonteCarloReport& report) {
  const size_t rows = report.time.size();
  if (rows == 0) throw FilterError("consistency_stats: empty report");
  const size_t start = rows - rows / 3;  // final third of the run

  const std::vector<Vector> sampled = report.sampled_sigma();
  const std::vector<Vector> filter = report.mean_filter_sigma();
  const std::vector<Vector> mean = report.mean_err();

  ConsistencySummary out;
  out.sigma_ratio = Vector::Zero(report.state_dim);
  out.err_zscore = Vector::Zero(report.state_dim);
  int count = 0;
  for (size_t t = start; t < rows; ++t) {
    ++count;
    for (Index i = 0; i < report.state_dim; ++i) {
      const double f = filter[t](i);
      out.sigma_ratio(i) += f > 0.0 ? sampled[t](i) / f : 0.0;
      // Bias in units of the sampled spread. A nonlinear filter keeps a small
      // bias that does not shrink with the run count, so normalizing by the
      // standard error would diverge as runs are added.
      const double s = sampled[t](i);
      out.err_zscore(i) += s > 0.0 ? mean[t](i) / s : 0.0;
    }
  }
  out.sigma_ratio /= count;
  out.err_zscore /= count;
  return out;
}

}  // namespace pukf
