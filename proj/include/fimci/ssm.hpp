#pragma once

#include <vector>

#include "fimci/model.hpp"

namespace fimci {

/// Linear-Gaussian state-space model
///   x_t = A x_{t-1} + w_t,   w_t ~ N(0, Q)
///   y_t = C x_t + v_t,       v_t ~ N(0, R)
/// with scalar observations (m = 1). The estimated parameter is the diagonal
/// of Q; A, C, R, mu0, P0 are known.
struct SsmSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;   // 1 x l
  Eigen::MatrixXd R;   // 1 x 1
  Eigen::VectorXd mu0;
  Eigen::MatrixXd P0;
  bool joseph_update = false;  // covariance update form in kalman_filter

  int l() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(C.rows()); }
};

/// The configuration used throughout the state-space experiments.
SsmSpec paper_ssm_spec();

struct FilterTrace {
  Eigen::VectorXd innovations;            // eps_t
  Eigen::VectorXd innovation_vars;        // S_t = C P_{t|t-1} C^T + R
  std::vector<Eigen::VectorXd> gains;     // K_t
  std::vector<Eigen::MatrixXd> predicted_covs;  // P_{t|t-1}
  std::vector<Eigen::MatrixXd> filtered_covs;   // P_{t|t}
  double loglik = 0.0;                    // includes the -(n/2) log 2*pi term
};

class SsmModel final : public LikelihoodModel {
 public:
  explicit SsmModel(SsmSpec spec);

  int dim() const override { return spec_.l(); }
  ParameterVector parameter_template(const Eigen::VectorXd& values) const override;

  /// Runs the filter recursions, validating S_t > 0 and re-symmetrizing the
  /// covariances each step. Throws FilterDivergenceError when an innovation
  /// variance fails the positivity check.
  FilterTrace kalman_filter(const Dataset& data, const Eigen::VectorXd& theta) const;

  double nll(const Dataset& data, const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd nll_gradient(const Dataset& data,
                               const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd nll_hessian(const Dataset& data,
                              const Eigen::VectorXd& theta) const override;

  /// Expected per-sample information via the innovation representation:
  /// F(i,j) = n^-1 sum_t [ S_t^(i) S_t^(j) / (2 S_t^2)
  ///                      + E(eps_t^(i) eps_t^(j)) / S_t ],
  /// with the derivative second moments propagated by their own covariance
  /// recursion alongside the filter sensitivities.
  FimMatrix expected_fim(const Eigen::VectorXd& theta, int n) const override;

  Dataset sample(int n, const Eigen::VectorXd& theta,
                 std::uint64_t seed) const override;

  Eigen::VectorXd clamp_to_feasible(Eigen::VectorXd theta) const override;
  bool on_boundary(const Eigen::VectorXd& theta) const override;
  bool log_scale(int) const override { return true; }

  const SsmSpec& spec() const { return spec_; }

 private:
  struct Derivatives {
    double nll;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
  };
  Derivatives derivatives(const Dataset& data, const Eigen::VectorXd& theta,
                          int order) const;

  SsmSpec spec_;
};

}  // namespace fimci
