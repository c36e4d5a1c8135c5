#pragma once

#include <vector>

#include "fimci/model.hpp"

namespace fimci {

/// Signal-plus-noise observations X_i ~ N(mu, Sigma + Q_i) with known
/// per-observation noise covariances Q_i and diagonal Sigma. Parameter layout
/// is [mu_1..mu_q, Sigma_11..Sigma_qq], so p = 2q.
struct SpnSpec {
  int q = 1;
  std::vector<Eigen::MatrixXd> noise_covs;  // one symmetric PSD q x q per observation

  int n() const { return static_cast<int>(noise_covs.size()); }
};

/// Scalar-noise schedule q_i = 0.1 * (i mod 10) with i = 1..n.
std::vector<double> spn_noise_schedule_1d(int n);

/// 4-d schedule Q_i = sqrt(i) * U * U^T for i = 1..n, with one 4x4 U drawn
/// entrywise from Uniform(0, 0.1) per experiment.
std::vector<Eigen::MatrixXd> spn_noise_schedule_4d(int n, std::uint64_t seed);

SpnSpec make_spn_spec_1d(int n);
SpnSpec make_spn_spec_4d(int n, std::uint64_t seed);

class SpnModel final : public LikelihoodModel {
 public:
  explicit SpnModel(SpnSpec spec);

  int dim() const override { return 2 * spec_.q; }
  ParameterVector parameter_template(const Eigen::VectorXd& values) const override;

  double nll(const Dataset& data, const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd nll_gradient(const Dataset& data,
                               const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd nll_hessian(const Dataset& data,
                              const Eigen::VectorXd& theta) const override;

  /// Closed-form Gaussian information. Mean block n^-1 sum_i (Sigma+Q_i)^-1,
  /// variance block n^-1 sum_i tr[(Sigma+Q_i)^-1 E_j (Sigma+Q_i)^-1 E_k]/2,
  /// mean/variance cross block identically zero.
  FimMatrix expected_fim(const Eigen::VectorXd& theta, int n) const override;

  Dataset sample(int n, const Eigen::VectorXd& theta,
                 std::uint64_t seed) const override;

  Eigen::VectorXd clamp_to_feasible(Eigen::VectorXd theta) const override;
  bool on_boundary(const Eigen::VectorXd& theta) const override;
  bool log_scale(int j) const override { return j >= spec_.q; }
  Eigen::VectorXd moment_init(const Dataset& data) const override;

  const SpnSpec& spec() const { return spec_; }

 private:
  /// Inverses of Sigma + Q_i for every observation at the given theta.
  std::vector<Eigen::MatrixXd> covariance_inverses(const Eigen::VectorXd& theta,
                                                   int n) const;

  SpnSpec spec_;
};

}  // namespace fimci
