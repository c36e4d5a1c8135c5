#pragma once

#include <cstdint>
#include <functional>

#include "fimci/fim.hpp"
#include "fimci/model.hpp"

namespace fimci {

enum class Initializer { TruePerturbed, Moment, User };

enum class SolverFlag : unsigned {
  None = 0,
  Boundary = 1u << 0,
  NonPdHessian = 1u << 1,
  Relabeled = 1u << 2,
};

inline SolverFlag operator|(SolverFlag a, SolverFlag b) {
  return static_cast<SolverFlag>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
inline bool has_flag(SolverFlag set, SolverFlag flag) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(flag)) != 0;
}

struct SolverOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  int step_halving_limit = 40;
  Initializer initializer = Initializer::TruePerturbed;
  double perturbation_scale = 0.1;
  /// Reference point for the TruePerturbed initializer.
  Eigen::VectorXd theta_star;
  /// Starting point for the User initializer.
  Eigen::VectorXd user_theta0;
  /// Seed for the initializer perturbation.
  std::uint64_t init_seed = 0;
};

struct EstimationResult {
  ParameterVector theta_hat;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
  double final_nll = 0.0;
  Eigen::MatrixXd hessian_at_mle;
  SolverFlag flags = SolverFlag::None;
};

/// Starting point mandated by the options; clamped into the feasible region.
Eigen::VectorXd initial_point(const LikelihoodModel& model, const Dataset& data,
                              const SolverOptions& options);

/// Damped Newton iteration with step halving on nll increase. Singular or
/// indefinite Hessians fall back to a unit-trust-radius gradient step and set
/// the NonPdHessian flag. The model's canonicalization is applied before
/// returning; non-convergence is reported through `converged`, never thrown.
EstimationResult newton_mle(const LikelihoodModel& model, const Dataset& data,
                            const SolverOptions& options);

/// BFGS quasi-Newton iteration performed in the model's unconstrained
/// reparameterization (log-space for variance-type components), with a
/// backtracking line search. Same convergence contract as newton_mle; the
/// gradient tolerance applies to the natural-space gradient.
EstimationResult search_mle(const LikelihoodModel& model, const Dataset& data,
                            const SolverOptions& options);

/// Observed FIM: model Hessian at theta_hat divided by n, symmetrized.
FimMatrix observed_fim(const LikelihoodModel& model, const Dataset& data,
                       const Eigen::VectorXd& theta_hat);

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

/// Central finite differences with per-component step rel_step * (1 + |theta_j|).
/// Throws StepUnderflowError when a step is indistinguishable from zero.
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& theta,
                            double rel_step);

/// Central second differences of f, symmetrized.
Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& theta,
                           double rel_step);

}  // namespace fimci
