#pragma once

#include <Eigen/Core>
#include <memory>
#include <utility>

#include "fimci/fim.hpp"
#include "fimci/parameter_vector.hpp"

namespace fimci {

/// A parametric likelihood: everything the solvers and the Monte Carlo engine
/// need to know about one of the experiment families.
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;

  virtual int dim() const = 0;

  /// Names and box constraints for the parameter; values hold a feasible
  /// reference point.
  virtual ParameterVector parameter_template(const Eigen::VectorXd& values) const = 0;

  virtual double nll(const Dataset& data, const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd nll_gradient(const Dataset& data,
                                       const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::MatrixXd nll_hessian(const Dataset& data,
                                      const Eigen::VectorXd& theta) const = 0;

  /// Per-sample expected FIM at theta for a sample of size n.
  virtual FimMatrix expected_fim(const Eigen::VectorXd& theta, int n) const = 0;

  virtual Dataset sample(int n, const Eigen::VectorXd& theta,
                         std::uint64_t seed) const = 0;

  /// Projects a solver iterate back into the feasible region.
  virtual Eigen::VectorXd clamp_to_feasible(Eigen::VectorXd theta) const {
    return theta;
  }

  /// Maps an estimate to its canonical representative (e.g. mixture label
  /// order); returns the point and whether it changed.
  virtual std::pair<Eigen::VectorXd, bool> canonicalize(Eigen::VectorXd theta) const {
    return {std::move(theta), false};
  }

  /// True if theta sits on the clamp limits used by clamp_to_feasible.
  virtual bool on_boundary(const Eigen::VectorXd&) const { return false; }

  /// True if component j should be optimized in log-space by search_mle.
  virtual bool log_scale(int j) const { return false; }

  /// Data-driven starting point for the Moment initializer.
  virtual Eigen::VectorXd moment_init(const Dataset& data) const;
};

}  // namespace fimci
