#include "fimci/confidence.hpp"

#include <cmath>
#include <stdexcept>

#include "fimci/errors.hpp"
#include "fimci/normal.hpp"

namespace fimci {

JointRegion::JointRegion(std::vector<ConfidenceInterval> ivs, double alpha)
    : intervals(std::move(ivs)), total_alpha(alpha) {
  double sum = 0.0;
  for (const auto& iv : intervals) sum += 1.0 - iv.nominal_level;
  if (std::fabs(sum - total_alpha) > 1e-12) {
    throw ValidationError("JointRegion: component alphas do not sum to total_alpha");
  }
}

double confidence_level(double x, double v_ref, double alpha) {
  if (!(x > 0.0)) {
    throw std::domain_error("confidence_level: variance candidate must be > 0");
  }
  if (!(v_ref > 0.0)) {
    throw std::domain_error("confidence_level: reference variance must be > 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("confidence_level: alpha must lie in (0,1)");
  }
  const double z = normal_quantile(1.0 - alpha / 2.0);
  return 2.0 * normal_cdf(z * std::sqrt(x / v_ref)) - 1.0;
}

ConfidenceInterval confidence_interval(double t_hat, double var_est, int n,
                                       double alpha, int component_index) {
  if (!(var_est > 0.0)) {
    throw std::domain_error("confidence_interval: variance estimate must be > 0");
  }
  if (n < 1) throw std::domain_error("confidence_interval: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("confidence_interval: alpha must lie in (0,1)");
  }
  const double half =
      normal_quantile(1.0 - alpha / 2.0) * std::sqrt(var_est / n);
  return ConfidenceInterval{component_index, t_hat - half, t_hat + half,
                            1.0 - alpha};
}

std::vector<double> bonferroni_split(double alpha_total, int p) {
  if (!(alpha_total > 0.0 && alpha_total < 1.0)) {
    throw std::domain_error("bonferroni_split: alpha must lie in (0,1)");
  }
  if (p < 1) throw std::domain_error("bonferroni_split: p must be >= 1");
  return std::vector<double>(p, alpha_total / p);
}

}  // namespace fimci
