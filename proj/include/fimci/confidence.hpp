#pragma once

#include <vector>

namespace fimci {

/// A componentwise confidence interval at nominal level 1 - alpha_j.
struct ConfidenceInterval {
  int component_index;
  double lower;
  double upper;
  double nominal_level;
};

/// Bonferroni product region: componentwise intervals whose significance
/// levels sum to total_alpha.
struct JointRegion {
  std::vector<ConfidenceInterval> intervals;
  double total_alpha;

  JointRegion(std::vector<ConfidenceInterval> ivs, double alpha);
};

/// Coverage of the interval built from variance candidate x when the true
/// variance is v_ref: 2*Phi(z_{1-alpha/2} * sqrt(x / v_ref)) - 1.
/// Strictly increasing in x, equals 1 - alpha at x == v_ref.
/// Throws std::domain_error for x <= 0, v_ref <= 0 or alpha outside (0,1).
double confidence_level(double x, double v_ref, double alpha);

/// Interval t_hat +/- z_{1-alpha/2} * sqrt(var_est / n).
ConfidenceInterval confidence_interval(double t_hat, double var_est, int n,
                                       double alpha, int component_index = 0);

/// Uniform Bonferroni split: alpha_total / p per component.
std::vector<double> bonferroni_split(double alpha_total, int p);

}  // namespace fimci
