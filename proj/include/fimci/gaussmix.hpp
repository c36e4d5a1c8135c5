#pragma once

#include "fimci/model.hpp"

namespace fimci {

/// Two-component Gaussian mixture with known common standard deviation.
/// Parameter order is [lambda, mu1, mu2].
struct GaussMixSpec {
  double sigma = 1.0;
};

class GaussMixModel final : public LikelihoodModel {
 public:
  explicit GaussMixModel(GaussMixSpec spec);

  int dim() const override { return 3; }
  ParameterVector parameter_template(const Eigen::VectorXd& values) const override;

  /// Mixture density lambda*N(mu1,sigma^2) + (1-lambda)*N(mu2,sigma^2).
  double density(double x, const Eigen::VectorXd& theta) const;
  double log_density(double x, const Eigen::VectorXd& theta) const;

  /// Gradient and Hessian of -log f at a single observation.
  Eigen::Vector3d point_nll_gradient(double x, const Eigen::VectorXd& theta) const;
  Eigen::Matrix3d point_nll_hessian(double x, const Eigen::VectorXd& theta) const;

  double nll(const Dataset& data, const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd nll_gradient(const Dataset& data,
                               const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd nll_hessian(const Dataset& data,
                              const Eigen::VectorXd& theta) const override;

  /// Expected FIM by adaptive quadrature of the per-observation Hessian
  /// against the density over [min(mu)-8*sigma, max(mu)+8*sigma].
  FimMatrix expected_fim(const Eigen::VectorXd& theta, int n) const override;

  Dataset sample(int n, const Eigen::VectorXd& theta,
                 std::uint64_t seed) const override;

  Eigen::VectorXd clamp_to_feasible(Eigen::VectorXd theta) const override;
  bool on_boundary(const Eigen::VectorXd& theta) const override;
  std::pair<Eigen::VectorXd, bool> canonicalize(Eigen::VectorXd theta) const override;
  Eigen::VectorXd moment_init(const Dataset& data) const override;

  const GaussMixSpec& spec() const { return spec_; }

 private:
  void check_lambda(const Eigen::VectorXd& theta) const;

  GaussMixSpec spec_;
};

}  // namespace fimci
