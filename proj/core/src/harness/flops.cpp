#include "pukf/harness/flops.hpp"

namespace pukf {

double flops_batch_total(double n, double m) {
  return m * m * m + 1.5 * n * m * m + 0.5 * m * m + n * m + 0.5 * m + 1.5 * m * n * n;
}

std::vector<FlopRow> flops_batch_stages(double n, double m) {
  return {
      {"batch", "H*P", {m * n * n, 0.0}},
      {"batch", "H*(H*P)^T + R", {n * (0.5 * m * m + 0.5 * m), 0.0}},
      {"batch", "innovation inverse", {m * m * m + 0.5 * m * m + 0.5 * m, 0.0}},
      {"batch", "gain", {n * m * m, 0.0}},
      {"batch", "covariance update", {(0.5 * (n * n - n) + n) * m, 0.0}},
  };
}

double flops_sequential_total(double n, double m) {
  return (2.0 / 3.0) * m * m * m + m * m - (2.0 / 3.0) * m + 0.5 * m * m * n +
         2.0 * m * n + 1.5 * m * n * n;
}

std::vector<FlopRow> flops_sequential_stages(double n, double m) {
  const double per_scalar = 1.5 * n * n + 2.5 * n + 1.0;
  return {
      {"sequential", "H*P", {n * n, 0.0}},
      {"sequential", "H*(H*P)^T + R", {n, 0.0}},
      {"sequential", "innovation inverse", {1.0, 0.0}},
      {"sequential", "gain", {n, 0.0}},
      {"sequential", "covariance update", {0.5 * (n * n - n) + n, 0.0}},
      {"sequential", "sum x m measurements", {per_scalar * m, 0.0}},
      {"sequential", "UDU and decorrelation",
       {(2.0 / 3.0) * m * m * m + m * m - (5.0 / 3.0) * m + 0.5 * m * m * n - 0.5 * m * n,
        0.0}},
  };
}

double flops_sequential_advantage(double n, double m) {
  return 0.5 * m * m * m - 0.5 * m * m + m * m * n - m * n + (7.0 / 6.0) * m;
}

FlopCount flops_sr_pu_combined(double n, double q) {
  return {2.5 * n * n * n + (q + 7.5) * n * n + 6.0 * n + 1.0, 2.0 * n + 2.0};
}

FlopCount flops_ud_pu_combined(double n, double q) {
  return {2.0 * n * n * n + (q + 4.0) * n * n + (q + 1.0) * n + 2.0, 0.0};
}

FlopCount flops_sr_conventional_update(double n) {
  return {3.0 * n * n + 4.0 * n + 1.0, 1.0};
}

FlopCount flops_sr_pu_extra(double n) {
  return {n * n * n + 3.0 * n * n + 3.0 * n, n + 1.0};
}

FlopCount flops_ud_conventional_update(double n) { return {1.5 * n * n + 1.5 * n, 0.0}; }

FlopCount flops_ud_pu_update(double n) {
  return {0.5 * n * n * n + 3.5 * n * n + n + 2.0, 0.0};
}

FlopCount flops_ud_pu_extra(double n) {
  return {0.5 * n * n * n + 2.0 * n * n - 0.5 * n + 2.0, 0.0};
}

std::vector<FlopRow> flops_report(double n, double m, double q) {
  std::vector<FlopRow> rows = flops_batch_stages(n, m);
  rows.push_back({"batch", "total", {flops_batch_total(n, m), 0.0}});

  std::vector<FlopRow> seq = flops_sequential_stages(n, m);
  rows.insert(rows.end(), seq.begin(), seq.end());
  rows.push_back({"sequential", "total", {flops_sequential_total(n, m), 0.0}});

  rows.push_back({"advantage", "batch", {flops_batch_total(n, m), 0.0}});
  rows.push_back({"advantage", "sequential", {flops_sequential_total(n, m), 0.0}});
  rows.push_back(
      {"advantage", "sequential advantage over batch", {flops_sequential_advantage(n, m), 0.0}});

  rows.push_back({"sr-conventional", "square root Kalman update", flops_sr_conventional_update(n)});
  rows.push_back({"sr-conventional", "partial-update extra cost", flops_sr_pu_extra(n)});

  rows.push_back({"factorized", "square root partial-update", flops_sr_pu_combined(n, q)});
  rows.push_back({"factorized", "UD partial-update", flops_ud_pu_combined(n, q)});

  rows.push_back({"ud-update", "conventional UD Kalman update", flops_ud_conventional_update(n)});
  rows.push_back({"ud-update", "UD partial-update Kalman update", flops_ud_pu_update(n)});
  rows.push_back({"ud-update", "UD partial-update extra cost", flops_ud_pu_extra(n)});
  return rows;
}

}  // namespace pukf
