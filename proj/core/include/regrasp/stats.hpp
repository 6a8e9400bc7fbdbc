#pragma once

namespace regrasp {

struct Ci95 {
  double low = 0.0;   // percent
  double high = 0.0;  // percent
};

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Exact (Clopper-Pearson) two-sided 95% binomial confidence interval,
/// returned in percentage points.
Ci95 binomial_ci95(int successes, int total);

}  // namespace regrasp
