#include "fimci/gaussmix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fimci/errors.hpp"
#include "fimci/quadrature.hpp"
#include "fimci/rng.hpp"

namespace fimci {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct PointWork {
  double r1;   // posterior weight of component 1
  double r2;   // posterior weight of component 2
  double d1;   // x - mu1
  double d2;   // x - mu2
  double logf;
};

}  // namespace

GaussMixModel::GaussMixModel(GaussMixSpec spec) : spec_(spec) {
  if (!(spec_.sigma > 0.0)) throw ValidationError("GaussMixModel: sigma must be > 0");
}

ParameterVector GaussMixModel::parameter_template(const Eigen::VectorXd& values) const {
  Eigen::Vector3d lower(0.0, -std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity());
  Eigen::Vector3d upper(1.0, std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity());
  return ParameterVector(values, {"lambda", "mu1", "mu2"}, lower, upper);
}

void GaussMixModel::check_lambda(const Eigen::VectorXd& theta) const {
  if (!(theta(0) > 0.0 && theta(0) < 1.0)) {
    throw std::domain_error("GaussMixModel: lambda must lie in (0,1)");
  }
}

namespace {

// Posterior responsibilities and residuals via log-sum-exp; keeps the density
// representable when x is far from both components.
PointWork point_work(double x, const Eigen::VectorXd& theta, double sigma) {
  const double lambda = theta(0);
  const double inv_var = 1.0 / (sigma * sigma);
  PointWork w;
  w.d1 = x - theta(1);
  w.d2 = x - theta(2);
  const double base = -0.5 * kLog2Pi - std::log(sigma);
  const double la = std::log(lambda) + base - 0.5 * w.d1 * w.d1 * inv_var;
  const double lb = std::log1p(-lambda) + base - 0.5 * w.d2 * w.d2 * inv_var;
  const double m = std::max(la, lb);
  w.logf = m + std::log(std::exp(la - m) + std::exp(lb - m));
  w.r1 = std::exp(la - w.logf);
  w.r2 = std::exp(lb - w.logf);
  return w;
}

Eigen::Vector3d log_density_score(const PointWork& w, double lambda, double inv_var) {
  Eigen::Vector3d u;
  u(0) = w.r1 / lambda - w.r2 / (1.0 - lambda);
  u(1) = w.r1 * w.d1 * inv_var;
  u(2) = w.r2 * w.d2 * inv_var;
  return u;
}

Eigen::Matrix3d point_hessian_impl(const PointWork& w, double lambda, double inv_var) {
  const Eigen::Vector3d u = log_density_score(w, lambda, inv_var);
  // Second derivative of the density over the density.
  Eigen::Matrix3d curv = Eigen::Matrix3d::Zero();
  curv(0, 1) = curv(1, 0) = (w.r1 / lambda) * w.d1 * inv_var;
  curv(0, 2) = curv(2, 0) = -(w.r2 / (1.0 - lambda)) * w.d2 * inv_var;
  curv(1, 1) = w.r1 * (w.d1 * w.d1 * inv_var - 1.0) * inv_var;
  curv(2, 2) = w.r2 * (w.d2 * w.d2 * inv_var - 1.0) * inv_var;
  return u * u.transpose() - curv;
}

}  // namespace

double GaussMixModel::log_density(double x, const Eigen::VectorXd& theta) const {
  check_lambda(theta);
  return point_work(x, theta, spec_.sigma).logf;
}

double GaussMixModel::density(double x, const Eigen::VectorXd& theta) const {
  return std::exp(log_density(x, theta));
}

Eigen::Vector3d GaussMixModel::point_nll_gradient(double x,
                                                  const Eigen::VectorXd& theta) const {
  check_lambda(theta);
  const double inv_var = 1.0 / (spec_.sigma * spec_.sigma);
  const PointWork w = point_work(x, theta, spec_.sigma);
  return -log_density_score(w, theta(0), inv_var);
}

Eigen::Matrix3d GaussMixModel::point_nll_hessian(double x,
                                                 const Eigen::VectorXd& theta) const {
  check_lambda(theta);
  const double inv_var = 1.0 / (spec_.sigma * spec_.sigma);
  return point_hessian_impl(point_work(x, theta, spec_.sigma), theta(0), inv_var);
}

double GaussMixModel::nll(const Dataset& data, const Eigen::VectorXd& theta) const {
  check_lambda(theta);
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    total -= point_work(data.observations(i, 0), theta, spec_.sigma).logf;
  }
  return total;
}

Eigen::VectorXd GaussMixModel::nll_gradient(const Dataset& data,
                                            const Eigen::VectorXd& theta) const {
  check_lambda(theta);
  const double inv_var = 1.0 / (spec_.sigma * spec_.sigma);
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (int i = 0; i < data.n(); ++i) {
    const PointWork w = point_work(data.observations(i, 0), theta, spec_.sigma);
    g -= log_density_score(w, theta(0), inv_var);
  }
  return g;
}

Eigen::MatrixXd GaussMixModel::nll_hessian(const Dataset& data,
                                           const Eigen::VectorXd& theta) const {
  check_lambda(theta);
  const double inv_var = 1.0 / (spec_.sigma * spec_.sigma);
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (int i = 0; i < data.n(); ++i) {
    const PointWork w = point_work(data.observations(i, 0), theta, spec_.sigma);
    h += point_hessian_impl(w, theta(0), inv_var);
  }
  return h;
}

FimMatrix GaussMixModel::expected_fim(const Eigen::VectorXd& theta, int n) const {
  check_lambda(theta);
  const double sigma = spec_.sigma;
  const double inv_var = 1.0 / (sigma * sigma);
  const double lo = std::min(theta(1), theta(2)) - 8.0 * sigma;
  const double hi = std::max(theta(1), theta(2)) + 8.0 * sigma;

  // Upper triangle of the per-observation Hessian weighted by the density.
  auto integrand = [&](double x, Eigen::VectorXd& out) {
    const PointWork w = point_work(x, theta, sigma);
    const Eigen::Matrix3d h = point_hessian_impl(w, theta(0), inv_var);
    const double f = std::exp(w.logf);
    int k = 0;
    for (int r = 0; r < 3; ++r) {
      for (int c = r; c < 3; ++c) out(k++) = h(r, c) * f;
    }
  };

  QuadratureResult quad;
  try {
    quad = integrate_gk15(integrand, 6, lo, hi, 1e-9);
  } catch (const QuadratureError& e) {
    throw QuadratureError(std::string("gm_expected_fim: ") + e.what());
  }

  Eigen::Matrix3d fim;
  int k = 0;
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) {
      fim(r, c) = quad.value(k);
      fim(c, r) = quad.value(k);
      ++k;
    }
  }
  return FimMatrix(fim, FimKind::Expected, parameter_template(theta), n);
}

Dataset GaussMixModel::sample(int n, const Eigen::VectorXd& theta,
                              std::uint64_t seed) const {
  check_lambda(theta);
  if (n < 1) throw ValidationError("GaussMixModel::sample: n must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd obs(n, 1);
  for (int i = 0; i < n; ++i) {
    const double mu = rng.bernoulli(theta(0)) ? theta(1) : theta(2);
    obs(i, 0) = mu + spec_.sigma * rng.normal();
  }
  return Dataset(std::move(obs));
}

Eigen::VectorXd GaussMixModel::clamp_to_feasible(Eigen::VectorXd theta) const {
  theta(0) = std::clamp(theta(0), 1e-6, 1.0 - 1e-6);
  return theta;
}

bool GaussMixModel::on_boundary(const Eigen::VectorXd& theta) const {
  return theta(0) <= 1e-6 || theta(0) >= 1.0 - 1e-6;
}

std::pair<Eigen::VectorXd, bool> GaussMixModel::canonicalize(
    Eigen::VectorXd theta) const {
  if (theta(1) > theta(2)) {
    std::swap(theta(1), theta(2));
    theta(0) = 1.0 - theta(0);
    return {std::move(theta), true};
  }
  return {std::move(theta), false};
}

Eigen::VectorXd GaussMixModel::moment_init(const Dataset& data) const {
  std::vector<double> xs(data.observations.col(0).data(),
                         data.observations.col(0).data() + data.n());
  std::sort(xs.begin(), xs.end());
  const std::size_t half = xs.size() / 2;
  double lower_mean = 0.0, upper_mean = 0.0;
  for (std::size_t i = 0; i < half; ++i) lower_mean += xs[i];
  for (std::size_t i = half; i < xs.size(); ++i) upper_mean += xs[i];
  lower_mean /= std::max<std::size_t>(half, 1);
  upper_mean /= std::max<std::size_t>(xs.size() - half, 1);
  Eigen::Vector3d theta(0.5, lower_mean, upper_mean);
  if (!(lower_mean < upper_mean)) theta(2) = theta(1) + spec_.sigma;
  return theta;
}

}  // namespace fimci
