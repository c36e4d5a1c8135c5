#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fimci/confidence.hpp"
#include "fimci/errors.hpp"
#include "fimci/fim.hpp"
#include "fimci/normal.hpp"
#include "fimci/parameter_vector.hpp"
#include "fimci/quadrature.hpp"
#include "fimci/rng.hpp"

using namespace fimci;

TEST_CASE("normal cdf matches libm erfc and high-precision references") {
  // Independent route: libm's erfc.
  for (double x = -9.0; x <= 9.0; x += 0.0625) {
    const double reference = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(std::fabs(normal_cdf(x) - reference) <= 1e-15);
  }
  // Frozen values computed with 40-digit arithmetic.
  CHECK(normal_cdf(0.3) == doctest::Approx(0.6179114221889526373).epsilon(1e-15));
  CHECK(normal_cdf(-1.7) == doctest::Approx(0.04456546275854303949).epsilon(1e-15));
  CHECK(normal_cdf(2.5) == doctest::Approx(0.9937903346742238648).epsilon(1e-15));
  CHECK(normal_cdf(-4.2) == doctest::Approx(1.334574901590633835e-5).epsilon(1e-13));
  CHECK(normal_cdf(6.0) == doctest::Approx(0.9999999990134123550).epsilon(1e-15));
  CHECK(normal_cdf(-8.5) == doctest::Approx(9.479534822203318354e-18).epsilon(1e-12));
}

TEST_CASE("normal quantile inverts the cdf") {
  CHECK(std::fabs(normal_quantile(0.975) - 1.959963984540054236) < 1e-13);
  CHECK(std::fabs(normal_quantile(0.995) - 2.575829303548900761) < 1e-13);
  CHECK(std::fabs(normal_quantile(0.95) - 1.644853626951472715) < 1e-13);
  CHECK(std::fabs(normal_quantile(0.9) - 1.281551565544600467) < 1e-13);
  CHECK(std::fabs(normal_quantile(0.6) - 0.2533471031357997988) < 1e-14);
  CHECK(std::fabs(normal_quantile(0.025) + 1.959963984540054236) < 1e-13);
  CHECK(std::fabs(normal_quantile(1e-6) + 4.753424308822898948) < 1e-12);
  for (double p = 0.001; p < 1.0; p += 0.001) {
    CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) < 1e-14);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("confidence level fixed point and tails") {
  // pi(v, v, alpha) = 1 - alpha by construction.
  CHECK(std::fabs(confidence_level(2.5, 2.5, 0.05) - 0.95) < 1e-12);
  for (double alpha : {0.01, 0.05, 0.10}) {
    for (double v : {1e-4, 0.3, 1.0, 42.0, 1e6}) {
      CHECK(std::fabs(confidence_level(v, v, alpha) - (1.0 - alpha)) < 1e-12);
    }
  }
  // x -> 0+ drives the level to zero.
  CHECK(confidence_level(1e-300, 1.0, 0.05) < 1e-10);
  // Frozen high-precision oracle: 2*Phi(2*z_{0.975}) - 1.
  CHECK(std::fabs(confidence_level(4.0, 1.0, 0.05) - 0.9999114245616785961) < 1e-12);
  CHECK_THROWS_AS(confidence_level(-1.0, 1.0, 0.05), std::domain_error);
  CHECK_THROWS_AS(confidence_level(1.0, 0.0, 0.05), std::domain_error);
  CHECK_THROWS_AS(confidence_level(1.0, 1.0, 1.5), std::domain_error);
}

TEST_CASE("confidence level is strictly monotone over a 1000-point grid") {
  double previous = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double x = 0.01 * i;
    const double level = confidence_level(x, 2.0, 0.05);
    CHECK(level > previous);
    CHECK(level > 0.0);
    CHECK(level < 1.0);
    previous = level;
  }
}

TEST_CASE("confidence interval geometry") {
  const ConfidenceInterval ci = confidence_interval(0.0, 1.0, 100, 0.05);
  CHECK(std::fabs(ci.lower + 0.1959963984540054236) < 1e-14);
  CHECK(std::fabs(ci.upper - 0.1959963984540054236) < 1e-14);
  CHECK(ci.nominal_level == doctest::Approx(0.95));

  // Vanishing variance collapses the interval onto the estimate.
  const ConfidenceInterval tight = confidence_interval(5.0, 1e-300, 10, 0.05);
  CHECK(tight.lower == doctest::Approx(5.0));
  CHECK(tight.upper == doctest::Approx(5.0));

  // Smaller alpha gives a strictly wider interval.
  const ConfidenceInterval wide = confidence_interval(1.0, 2.0, 50, 0.01);
  const ConfidenceInterval narrow = confidence_interval(1.0, 2.0, 50, 0.05);
  CHECK(wide.lower < narrow.lower);
  CHECK(wide.upper > narrow.upper);

  // Duality with the confidence level function.
  CHECK(std::fabs(confidence_level(2.0, 2.0, 0.05) - narrow.nominal_level) < 1e-12);

  CHECK_THROWS_AS(confidence_interval(0.0, -1.0, 10, 0.05), std::domain_error);
}

TEST_CASE("bonferroni split") {
  const auto split5 = bonferroni_split(0.05, 5);
  REQUIRE(split5.size() == 5);
  double sum = 0.0;
  for (double a : split5) {
    CHECK(a == doctest::Approx(0.01));
    sum += a;
  }
  CHECK(std::fabs(sum - 0.05) < 1e-15);

  const auto split1 = bonferroni_split(0.05, 1);
  REQUIRE(split1.size() == 1);
  CHECK(split1[0] == doctest::Approx(0.05));

  const auto split3 = bonferroni_split(0.10, 3);
  sum = 0.0;
  for (double a : split3) sum += a;
  CHECK(std::fabs(sum - 0.10) < 1e-15);
}

TEST_CASE("joint region alpha bookkeeping") {
  std::vector<ConfidenceInterval> ivs;
  const auto alphas = bonferroni_split(0.05, 4);
  for (int j = 0; j < 4; ++j) {
    ivs.push_back(confidence_interval(0.0, 1.0, 100, alphas[j], j));
  }
  const JointRegion region(ivs, 0.05);
  CHECK(region.intervals.size() == 4);

  ivs[0].nominal_level = 0.5;  // break the bookkeeping
  CHECK_THROWS_AS(JointRegion(ivs, 0.05), ValidationError);
}

TEST_CASE("parameter vector invariants") {
  Eigen::Vector2d values(0.5, 1.0);
  const ParameterVector theta(values, {"a", "b"});
  CHECK(theta.dim() == 2);
  CHECK_THROWS_AS(ParameterVector(values, {"a", "a"}), ValidationError);

  Eigen::Vector2d lower(0.0, 0.0), upper(1.0, 2.0);
  CHECK_NOTHROW(ParameterVector(values, {"a", "b"}, lower, upper));
  Eigen::Vector2d outside(0.0, 1.0);  // sits on the bound
  CHECK_THROWS_AS(ParameterVector(outside, {"a", "b"}, lower, upper),
                  ValidationError);
}

TEST_CASE("invert_fim on simple and random SPD matrices") {
  const ParameterVector at(Eigen::Vector2d(1.0, 1.0), {"a", "b"});

  const FimMatrix identity(Eigen::Matrix2d::Identity(), FimKind::Expected, at, 10);
  CHECK((invert_fim(identity).inverse - Eigen::Matrix2d::Identity()).norm() < 1e-14);

  Eigen::Matrix2d diag = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  const FimMatrix diag_fim(diag, FimKind::Observed, at, 10);
  const FimInverse diag_inv = invert_fim(diag_fim);
  CHECK(diag_inv.inverse(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(diag_inv.inverse(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(diag_inv.rcond == doctest::Approx(0.5).epsilon(1e-12));

  // Random SPD: residual check needs no external value.
  std::mt19937_64 engine(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3d g;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) g(r, c) = gauss(engine);
    }
    const Eigen::Matrix3d spd =
        g * g.transpose() + 0.1 * Eigen::Matrix3d::Identity();
    const FimInverse inv = invert_spd(spd);
    CHECK((spd * inv.inverse - Eigen::Matrix3d::Identity()).norm() < 1e-10);
    CHECK((inv.inverse - inv.inverse.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // Double inversion recovers the original matrix.
    const FimInverse back = invert_spd(inv.inverse);
    CHECK((back.inverse - spd).norm() / spd.norm() < 1e-8);
  }

  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(invert_spd(indefinite), NotPositiveDefiniteError);

  Eigen::Matrix2d nearly_singular;
  nearly_singular << 1.0, 0.0, 0.0, 1e-14;
  CHECK(invert_spd(nearly_singular).ill_conditioned);
}

TEST_CASE("fim matrix validates symmetry") {
  const ParameterVector at(Eigen::Vector2d(1.0, 1.0), {"a", "b"});
  Eigen::Matrix2d skew;
  skew << 1.0, 0.5, 0.4999, 1.0;
  CHECK_THROWS_AS(FimMatrix(skew, FimKind::Observed, at, 5), ValidationError);
}

TEST_CASE("gk15 quadrature integrates smooth functions to tolerance") {
  // Gaussian density integrates to one.
  auto gauss_density = [](double x, Eigen::VectorXd& out) {
    out(0) = normal_pdf(x);
    out(1) = x * normal_pdf(x);
  };
  const QuadratureResult result = integrate_gk15(gauss_density, 2, -9.0, 9.0, 1e-12);
  CHECK(std::fabs(result.value(0) - 1.0) < 1e-10);
  CHECK(std::fabs(result.value(1)) < 1e-10);

  // A rapidly oscillating integrand under an impossible budget must throw.
  auto wiggle = [](double x, Eigen::VectorXd& out) { out(0) = std::sin(500.0 * x); };
  CHECK_THROWS_AS(integrate_gk15(wiggle, 1, 0.0, 50.0, 1e-12, 4), QuadratureError);
}

TEST_CASE("seeded rng streams are deterministic and well separated") {
  Rng a(seed_mix(123, 0));
  Rng b(seed_mix(123, 0));
  Rng c(seed_mix(123, 1));
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double xa = a.uniform01();
    CHECK(xa == b.uniform01());
    CHECK(xa > 0.0);
    CHECK(xa < 1.0);
    if (xa != c.uniform01()) any_diff = true;
  }
  CHECK(any_diff);

  // Normal draws have sane first moments.
  Rng d(99);
  double sum = 0.0, sumsq = 0.0;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double x = d.normal();
    sum += x;
    sumsq += x * x;
  }
  CHECK(std::fabs(sum / count) < 0.01);
  CHECK(std::fabs(sumsq / count - 1.0) < 0.02);
}
