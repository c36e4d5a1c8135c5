#include "fimci/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "fimci/errors.hpp"
#include "fimci/rng.hpp"

namespace fimci {

namespace {

// Keeps non-finite nll values out of line-search comparisons.
double safe_eval(const LikelihoodModel& model, const Dataset& data,
                 const Eigen::VectorXd& theta) {
  try {
    const double value = model.nll(data, theta);
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
  } catch (const NotPositiveDefiniteError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const FilterDivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

EstimationResult finalize(const LikelihoodModel& model, const Dataset& data,
                          Eigen::VectorXd theta, bool converged, int iterations,
                          double grad_norm, double nll_value, SolverFlag flags) {
  auto [canonical, relabeled] = model.canonicalize(std::move(theta));
  if (relabeled) flags = flags | SolverFlag::Relabeled;
  EstimationResult result{
      model.parameter_template(canonical), converged,     iterations,
      grad_norm,                           nll_value,     Eigen::MatrixXd(),
      flags};
  result.hessian_at_mle = model.nll_hessian(data, canonical);
  return result;
}

}  // namespace

Eigen::VectorXd initial_point(const LikelihoodModel& model, const Dataset& data,
                              const SolverOptions& options) {
  switch (options.initializer) {
    case Initializer::TruePerturbed: {
      if (options.theta_star.size() != model.dim()) {
        throw ValidationError("initial_point: theta_star missing or wrong size");
      }
      Rng rng(seed_mix(options.init_seed, 0x1217));
      Eigen::VectorXd theta = options.theta_star;
      for (int j = 0; j < theta.size(); ++j) {
        theta(j) *= 1.0 + rng.uniform(-options.perturbation_scale,
                                      options.perturbation_scale);
      }
      return model.clamp_to_feasible(std::move(theta));
    }
    case Initializer::Moment:
      return model.clamp_to_feasible(model.moment_init(data));
    case Initializer::User:
      if (options.user_theta0.size() != model.dim()) {
        throw ValidationError("initial_point: user_theta0 missing or wrong size");
      }
      return model.clamp_to_feasible(options.user_theta0);
  }
  throw ValidationError("initial_point: unknown initializer");
}

EstimationResult newton_mle(const LikelihoodModel& model, const Dataset& data,
                            const SolverOptions& options) {
  Eigen::VectorXd theta = initial_point(model, data, options);
  double nll_value = safe_eval(model, data, theta);
  SolverFlag flags = SolverFlag::None;
  double grad_norm = std::numeric_limits<double>::infinity();
  int iter = 0;

  for (; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd grad = model.nll_gradient(data, theta);
    grad_norm = grad.norm();
    if (grad_norm <= options.gradient_tolerance) break;

    const Eigen::MatrixXd hess = model.nll_hessian(data, theta);
    Eigen::VectorXd step;
    Eigen::LLT<Eigen::MatrixXd> llt(((hess + hess.transpose()) * 0.5).eval());
    if (llt.info() == Eigen::Success) {
      step = -llt.solve(grad);
    } else {
      // Indefinite or singular curvature: gradient step, unit trust radius.
      flags = flags | SolverFlag::NonPdHessian;
      step = -grad;
      if (step.norm() > 1.0) step /= step.norm();
    }

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.step_halving_limit; ++halving) {
      const Eigen::VectorXd candidate =
          model.clamp_to_feasible(theta + scale * step);
      const double candidate_nll = safe_eval(model, data, candidate);
      if (candidate_nll <= nll_value) {
        theta = candidate;
        nll_value = candidate_nll;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; report current point
  }

  const bool converged = grad_norm <= options.gradient_tolerance;
  if (model.on_boundary(theta)) flags = flags | SolverFlag::Boundary;
  return finalize(model, data, std::move(theta), converged, iter, grad_norm,
                  nll_value, flags);
}

namespace {

Eigen::VectorXd to_unconstrained(const LikelihoodModel& model,
                                 const Eigen::VectorXd& theta) {
  Eigen::VectorXd eta = theta;
  for (int j = 0; j < theta.size(); ++j) {
    if (model.log_scale(j)) eta(j) = std::log(theta(j));
  }
  return eta;
}

Eigen::VectorXd from_unconstrained(const LikelihoodModel& model,
                                   const Eigen::VectorXd& eta) {
  Eigen::VectorXd theta = eta;
  for (int j = 0; j < eta.size(); ++j) {
    if (model.log_scale(j)) theta(j) = std::exp(eta(j));
  }
  return theta;
}

// d nll / d eta_j = theta_j * g_j on log-scaled components.
Eigen::VectorXd chain_gradient(const LikelihoodModel& model,
                               const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& grad) {
  Eigen::VectorXd out = grad;
  for (int j = 0; j < theta.size(); ++j) {
    if (model.log_scale(j)) out(j) *= theta(j);
  }
  return out;
}

}  // namespace

EstimationResult search_mle(const LikelihoodModel& model, const Dataset& data,
                            const SolverOptions& options) {
  const int p = model.dim();
  Eigen::VectorXd theta = initial_point(model, data, options);
  Eigen::VectorXd eta = to_unconstrained(model, theta);

  double nll_value = safe_eval(model, data, theta);
  Eigen::VectorXd grad_nat = model.nll_gradient(data, theta);
  Eigen::VectorXd grad_eta = chain_gradient(model, theta, grad_nat);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(p, p);
  SolverFlag flags = SolverFlag::None;

  double grad_norm = grad_nat.norm();
  int iter = 0;
  for (; iter < options.max_iterations && grad_norm > options.gradient_tolerance;
       ++iter) {
    Eigen::VectorXd direction = -h_inv * grad_eta;
    if (!(direction.dot(grad_eta) < 0.0)) {
      h_inv.setIdentity();
      direction = -grad_eta;
      flags = flags | SolverFlag::NonPdHessian;
    }

    // Backtracking Armijo line search in eta-space.
    double scale = 1.0;
    const double slope = direction.dot(grad_eta);
    bool accepted = false;
    Eigen::VectorXd eta_next, theta_next;
    Eigen::VectorXd precomputed_grad;
    double nll_next = 0.0;
    for (int halving = 0; halving <= options.step_halving_limit; ++halving) {
      eta_next = eta + scale * direction;
      theta_next = model.clamp_to_feasible(from_unconstrained(model, eta_next));
      nll_next = safe_eval(model, data, theta_next);
      if (nll_next <= nll_value + 1e-4 * scale * slope) {
        accepted = true;
        break;
      }
      if (halving == 0) {
        // Near the optimum the Armijo decrease drowns in the rounding of the
        // objective; accept a full step that shrinks the gradient without
        // raising the nll beyond rounding noise.
        const double noise = 16.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + std::fabs(nll_value));
        if (nll_next <= nll_value + noise) {
          const Eigen::VectorXd candidate_grad =
              model.nll_gradient(data, theta_next);
          if (candidate_grad.norm() < grad_nat.norm()) {
            precomputed_grad = candidate_grad;
            accepted = true;
            break;
          }
        }
      }
      scale *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd grad_nat_next =
        precomputed_grad.size() > 0 ? precomputed_grad
                                    : model.nll_gradient(data, theta_next);
    const Eigen::VectorXd grad_eta_next =
        chain_gradient(model, theta_next, grad_nat_next);

    // BFGS inverse-Hessian update.
    const Eigen::VectorXd s = eta_next - eta;
    const Eigen::VectorXd y = grad_eta_next - grad_eta;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
      const Eigen::MatrixXd proj = identity - (s * y.transpose()) / sy;
      h_inv = proj * h_inv * proj.transpose() + (s * s.transpose()) / sy;
    }

    eta = eta_next;
    theta = theta_next;
    nll_value = nll_next;
    grad_nat = grad_nat_next;
    grad_eta = grad_eta_next;
    grad_norm = grad_nat.norm();
  }

  const bool converged = grad_norm <= options.gradient_tolerance;
  if (model.on_boundary(theta)) flags = flags | SolverFlag::Boundary;
  return finalize(model, data, std::move(theta), converged, iter, grad_norm,
                  nll_value, flags);
}

FimMatrix observed_fim(const LikelihoodModel& model, const Dataset& data,
                       const Eigen::VectorXd& theta_hat) {
  Eigen::MatrixXd hess = model.nll_hessian(data, theta_hat);
  hess = ((hess + hess.transpose()) * 0.5).eval();
  hess /= double(data.n());
  return FimMatrix(hess, FimKind::Observed, model.parameter_template(theta_hat),
                   data.n());
}

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& theta,
                            double rel_step) {
  const int p = static_cast<int>(theta.size());
  Eigen::VectorXd grad(p);
  Eigen::VectorXd point = theta;
  for (int j = 0; j < p; ++j) {
    const double h = rel_step * (1.0 + std::fabs(theta(j)));
    if (!(theta(j) + h != theta(j))) {
      throw StepUnderflowError("fd_gradient: step underflow at component " +
                               std::to_string(j));
    }
    point(j) = theta(j) + h;
    const double up = f(point);
    point(j) = theta(j) - h;
    const double down = f(point);
    point(j) = theta(j);
    grad(j) = (up - down) / (2.0 * h);
  }
  return grad;
}

Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& theta,
                           double rel_step) {
  const int p = static_cast<int>(theta.size());
  Eigen::VectorXd steps(p);
  for (int j = 0; j < p; ++j) {
    steps(j) = rel_step * (1.0 + std::fabs(theta(j)));
    if (!(theta(j) + steps(j) != theta(j))) {
      throw StepUnderflowError("fd_hessian: step underflow at component " +
                               std::to_string(j));
    }
  }
  const double f0 = f(theta);
  Eigen::MatrixXd hess(p, p);
  Eigen::VectorXd point = theta;
  for (int i = 0; i < p; ++i) {
    point(i) = theta(i) + steps(i);
    const double up = f(point);
    point(i) = theta(i) - steps(i);
    const double down = f(point);
    point(i) = theta(i);
    hess(i, i) = (up - 2.0 * f0 + down) / (steps(i) * steps(i));
    for (int j = i + 1; j < p; ++j) {
      point(i) = theta(i) + steps(i);
      point(j) = theta(j) + steps(j);
      const double pp = f(point);
      point(j) = theta(j) - steps(j);
      const double pm = f(point);
      point(i) = theta(i) - steps(i);
      const double mm = f(point);
      point(j) = theta(j) + steps(j);
      const double mp = f(point);
      point(i) = theta(i);
      point(j) = theta(j);
      const double mixed = (pp - pm - mp + mm) / (4.0 * steps(i) * steps(j));
      hess(i, j) = mixed;
      hess(j, i) = mixed;
    }
  }
  return hess;
}

}  // namespace fimci
