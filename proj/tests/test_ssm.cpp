#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fimci/errors.hpp"
#include "fimci/estimation.hpp"
#include "fimci/rng.hpp"
#include "fimci/ssm.hpp"
#include "support/oracles.hpp"

using namespace fimci;

namespace {

SsmModel paper_model() { return SsmModel(paper_ssm_spec()); }

Eigen::Vector3d theta_star() { return {1.0, 1.0, 1.0}; }

}  // namespace

TEST_CASE("degenerate dynamics: Q = 0, P0 = 0 reduces to white noise") {
  const SsmModel model = paper_model();

  // Samples are pure observation noise when the state is pinned at zero.
  const Eigen::Vector3d zero_q(1e-12, 1e-12, 1e-12);
  const Dataset data = model.sample(2000, zero_q, 5);
  const double var = data.observations.col(0).array().square().mean();
  CHECK(std::fabs(var - 1.0) < 0.1);

  // Filter: P stays ~0, S = R, loglik is the iid normal one.
  const FilterTrace trace = model.kalman_filter(data, zero_q);
  double direct = 0.0;
  for (int t = 0; t < data.n(); ++t) {
    direct -= 0.5 * (std::log(2.0 * M_PI) + std::log(1.0) +
                     data.observations(t, 0) * data.observations(t, 0));
  }
  CHECK(trace.loglik == doctest::Approx(direct).epsilon(1e-6));
  CHECK(trace.innovation_vars.minCoeff() >= 1.0);
  CHECK(trace.innovation_vars.maxCoeff() < 1.0 + 1e-8);
}

TEST_CASE("sampling is deterministic per seed") {
  const SsmModel model = paper_model();
  const Dataset a = model.sample(64, theta_star(), 11);
  const Dataset b = model.sample(64, theta_star(), 11);
  const Dataset c = model.sample(64, theta_star(), 12);
  CHECK((a.observations - b.observations).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.observations - c.observations).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("long-run output variance solves the discrete Lyapunov equation") {
  const SsmSpec spec = paper_ssm_spec();
  const SsmModel model(spec);
  const Eigen::MatrixXd pi = test::solve_discrete_lyapunov(
      spec.A, Eigen::Vector3d(theta_star()).asDiagonal());
  const double stationary_var = (spec.C * pi * spec.C.transpose())(0, 0) + 1.0;

  const int n = 400000;
  const Dataset data = model.sample(n, theta_star(), 99);
  const int burn = 1000;
  double acc = 0.0;
  for (int t = burn; t < n; ++t) acc += data.observations(t, 0) * data.observations(t, 0);
  const double sample_var = acc / (n - burn);
  CHECK(std::fabs(sample_var - stationary_var) / stationary_var < 0.05);
}

TEST_CASE("filter log-likelihood equals the dense joint Gaussian density") {
  const SsmSpec spec = paper_ssm_spec();
  const SsmModel model(spec);
  Rng rng(20240601);

  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng.uniform01() * 45);
    Eigen::Vector3d theta;
    for (int j = 0; j < 3; ++j) theta(j) = rng.uniform(0.25, 4.0);
    const std::uint64_t seed = rng.next_u64();

    const Dataset data = model.sample(n, theta, seed);
    const FilterTrace trace = model.kalman_filter(data, theta);
    const double dense =
        test::dense_gaussian_loglik(spec, theta, data.observations);
    CHECK(std::fabs(trace.loglik - dense) < 1e-8);
  }
}

TEST_CASE("nll is the negative filter log-likelihood") {
  const SsmModel model = paper_model();
  const Dataset data = model.sample(80, theta_star(), 4);
  const Eigen::Vector3d theta(0.8, 1.3, 1.1);
  CHECK(model.nll(data, theta) ==
        doctest::Approx(-model.kalman_filter(data, theta).loglik).epsilon(1e-12));
}

TEST_CASE("update never increases state uncertainty") {
  const SsmModel model = paper_model();
  const Dataset data = model.sample(60, theta_star(), 21);
  const FilterTrace trace = model.kalman_filter(data, theta_star());
  for (int t = 0; t < data.n(); ++t) {
    const Eigen::MatrixXd diff =
        trace.predicted_covs[t] - trace.filtered_covs[t];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    // Covariances stay symmetric PSD step by step.
    CHECK((trace.filtered_covs[t] - trace.filtered_covs[t].transpose())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> peig(
        trace.filtered_covs[t]);
    CHECK(peig.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("joseph-form update agrees with the default form") {
  SsmSpec joseph = paper_ssm_spec();
  joseph.joseph_update = true;
  const SsmModel a = paper_model();
  const SsmModel b{joseph};
  const Dataset data = a.sample(100, theta_star(), 31);
  CHECK(a.kalman_filter(data, theta_star()).loglik ==
        doctest::Approx(b.kalman_filter(data, theta_star()).loglik)
            .epsilon(1e-12));
}

TEST_CASE("sensitivity-recursion derivatives match finite differences") {
  const SsmModel model = paper_model();
  Rng rng(777);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::Vector3d theta;
    for (int j = 0; j < 3; ++j) theta(j) = rng.uniform(0.25, 4.0);
    const Dataset data = model.sample(60, theta, rng.next_u64());

    auto f = [&](const Eigen::VectorXd& point) { return model.nll(data, point); };
    const Eigen::VectorXd grad = model.nll_gradient(data, theta);
    const Eigen::VectorXd fd = fd_gradient(f, theta, 1e-5);
    CHECK((grad - fd).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + grad.norm()));

    Eigen::MatrixXd fd_hess(3, 3);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-5 * (1.0 + std::fabs(theta(j)));
      Eigen::Vector3d up = theta, down = theta;
      up(j) += h;
      down(j) -= h;
      fd_hess.col(j) =
          (model.nll_gradient(data, up) - model.nll_gradient(data, down)) /
          (2.0 * h);
    }
    const Eigen::MatrixXd hess = model.nll_hessian(data, theta);
    CHECK((hess - hess.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((hess - fd_hess).cwiseAbs().maxCoeff() /
              (1.0 + fd_hess.cwiseAbs().maxCoeff()) < 1e-4);
  }
}

TEST_CASE("gradient vanishes at the fitted optimum") {
  const SsmModel model = paper_model();
  const Dataset data = model.sample(100, theta_star(), 63);
  SolverOptions options;
  options.theta_star = theta_star();
  options.init_seed = 2;
  options.gradient_tolerance = 1e-6;
  const EstimationResult fit = search_mle(model, data, options);
  REQUIRE(fit.converged);
  CHECK(model.nll_gradient(data, fit.theta_hat.values()).norm() <= 1e-6);
}

TEST_CASE("expected FIM is a pure function of theta and n") {
  const SsmModel model = paper_model();
  const Eigen::MatrixXd a = model.expected_fim(theta_star(), 50).entries;
  const Eigen::MatrixXd b = model.expected_fim(theta_star(), 50).entries;
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  // Continuity along a joint scaling of Q; information decreases as the
  // process noise grows relative to fixed R.
  double previous_trace = std::numeric_limits<double>::infinity();
  for (double c = 0.5; c <= 2.0; c += 0.125) {
    const Eigen::MatrixXd fim =
        model.expected_fim(Eigen::Vector3d(c, c, c), 50).entries;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fim);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    CHECK(fim.trace() < previous_trace);
    previous_trace = fim.trace();
  }
}

TEST_CASE("expected FIM matches the Monte Carlo average of observed FIMs") {
  const int n = 50;
  const SsmModel model = paper_model();
  const Eigen::MatrixXd expected = model.expected_fim(theta_star(), n).entries;

  const int reps = 20000;
  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (int r = 0; r < reps; ++r) {
    const Dataset data = model.sample(n, theta_star(), 700000 + r);
    const Eigen::Matrix3d h = model.nll_hessian(data, theta_star()) / n;
    mean += h;
    second += h.cwiseProduct(h);
  }
  mean /= reps;
  second /= reps;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double se =
          std::sqrt(std::max(second(r, c) - mean(r, c) * mean(r, c), 0.0) / reps);
      CHECK(std::fabs(mean(r, c) - expected(r, c)) <= 3.0 * se + 1e-12);
    }
  }
}
