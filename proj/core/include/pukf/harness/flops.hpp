#pragma once

#include <string>
#include <vector>

namespace pukf {

/// Closed-form operation counts (multiplies/divides, square roots counted
/// separately) for the batch and sequential conventional updates and for the
/// factorized partial-update forms.
struct FlopCount {
  double muldiv = 0.0;
  double sqrts = 0.0;
};

struct FlopRow {
  std::string table;
  std::string label;
  FlopCount flops;
};

// Conventional update, batch (H is m x n).
double flops_batch_total(double n, double m);
std::vector<FlopRow> flops_batch_stages(double n, double m);

// Conventional update, sequential scalar processing incl. decorrelation.
double flops_sequential_total(double n, double m);
std::vector<FlopRow> flops_sequential_stages(double n, double m);

// Sequential advantage over batch, as tabulated.
double flops_sequential_advantage(double n, double m);

// Square-root and UD partial-update forms, propagation + update combined.
FlopCount flops_sr_pu_combined(double n, double q);
FlopCount flops_ud_pu_combined(double n, double q);

// Square-root update costs.
FlopCount flops_sr_conventional_update(double n);
FlopCount flops_sr_pu_extra(double n);

// UD scalar-update costs.
FlopCount flops_ud_conventional_update(double n);
FlopCount flops_ud_pu_update(double n);
FlopCount flops_ud_pu_extra(double n);

/// Every tabulated formula evaluated at (n, m, q).
std::vector<FlopRow> flops_report(double n, double m, double q);

}  // namespace pukf
