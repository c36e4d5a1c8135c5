#include "fimci/spn.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fimci/errors.hpp"
#include "fimci/rng.hpp"

namespace fimci {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kSigmaFloor = 1e-8;
}  // namespace

std::vector<double> spn_noise_schedule_1d(int n) {
  if (n < 1) throw ValidationError("spn_noise_schedule_1d: n must be >= 1");
  std::vector<double> q(n);
  for (int i = 1; i <= n; ++i) q[i - 1] = 0.1 * (i % 10);
  return q;
}

std::vector<Eigen::MatrixXd> spn_noise_schedule_4d(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("spn_noise_schedule_4d: n must be >= 1");
  Rng rng(seed);
  Eigen::Matrix4d u;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) u(r, c) = rng.uniform(0.0, 0.1);
  }
  const Eigen::Matrix4d gram = u * u.transpose();
  std::vector<Eigen::MatrixXd> covs(n);
  for (int i = 1; i <= n; ++i) covs[i - 1] = std::sqrt(double(i)) * gram;
  return covs;
}

SpnSpec make_spn_spec_1d(int n) {
  SpnSpec spec;
  spec.q = 1;
  spec.noise_covs.reserve(n);
  for (double qi : spn_noise_schedule_1d(n)) {
    spec.noise_covs.push_back(Eigen::MatrixXd::Constant(1, 1, qi));
  }
  return spec;
}

SpnSpec make_spn_spec_4d(int n, std::uint64_t seed) {
  SpnSpec spec;
  spec.q = 4;
  spec.noise_covs = spn_noise_schedule_4d(n, seed);
  return spec;
}

SpnModel::SpnModel(SpnSpec spec) : spec_(std::move(spec)) {
  if (spec_.q < 1) throw ValidationError("SpnModel: q must be >= 1");
  if (spec_.noise_covs.empty()) throw ValidationError("SpnModel: empty noise schedule");
  for (const auto& cov : spec_.noise_covs) {
    if (cov.rows() != spec_.q || cov.cols() != spec_.q) {
      throw ValidationError("SpnModel: noise covariance dimension mismatch");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError("SpnModel: noise covariance not symmetric");
    }
  }
}

ParameterVector SpnModel::parameter_template(const Eigen::VectorXd& values) const {
  const int q = spec_.q;
  std::vector<std::string> names;
  names.reserve(2 * q);
  for (int j = 1; j <= q; ++j) names.push_back(q == 1 ? "mu" : "mu" + std::to_string(j));
  for (int j = 1; j <= q; ++j) {
    names.push_back(q == 1 ? "sigma2"
                           : "Sigma" + std::to_string(j) + std::to_string(j));
  }
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(2 * q, -inf);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(2 * q, inf);
  lower.tail(q).setZero();
  return ParameterVector(values, names, lower, upper);
}

std::vector<Eigen::MatrixXd> SpnModel::covariance_inverses(
    const Eigen::VectorXd& theta, int n) const {
  const int q = spec_.q;
  if (n > spec_.n()) throw ValidationError("SpnModel: dataset longer than noise schedule");
  const Eigen::VectorXd sigma_diag = theta.tail(q);
  std::vector<Eigen::MatrixXd> inverses(n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd cov = spec_.noise_covs[i];
    cov.diagonal() += sigma_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError(
          "SpnModel: Sigma + Q_i not positive definite at observation " +
          std::to_string(i + 1));
    }
    inverses[i] = llt.solve(Eigen::MatrixXd::Identity(q, q));
  }
  return inverses;
}

double SpnModel::nll(const Dataset& data, const Eigen::VectorXd& theta) const {
  const int q = spec_.q;
  const int n = data.n();
  const Eigen::VectorXd mu = theta.head(q);
  const Eigen::VectorXd sigma_diag = theta.tail(q);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd cov = spec_.noise_covs[data.meta[i]];
    cov.diagonal() += sigma_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError("SpnModel: Sigma + Q_i not positive definite");
    }
    const Eigen::VectorXd r = data.observations.row(i).transpose() - mu;
    const Eigen::VectorXd half = llt.matrixL().solve(r);
    double log_det = 0.0;
    for (int j = 0; j < q; ++j) log_det += std::log(llt.matrixL()(j, j));
    total += 0.5 * (q * kLog2Pi + half.squaredNorm()) + log_det;
  }
  return total;
}

Eigen::VectorXd SpnModel::nll_gradient(const Dataset& data,
                                       const Eigen::VectorXd& theta) const {
  const int q = spec_.q;
  const int n = data.n();
  const Eigen::VectorXd mu = theta.head(q);
  const int slots = 1 + *std::max_element(data.meta.begin(), data.meta.end());
  const auto inverses = covariance_inverses(theta, slots);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * q);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& a = inverses[data.meta[i]];
    const Eigen::VectorXd r = data.observations.row(i).transpose() - mu;
    const Eigen::VectorXd v = a * r;
    grad.head(q) -= v;
    for (int j = 0; j < q; ++j) {
      grad(q + j) += 0.5 * (a(j, j) - v(j) * v(j));
    }
  }
  return grad;
}

Eigen::MatrixXd SpnModel::nll_hessian(const Dataset& data,
                                      const Eigen::VectorXd& theta) const {
  const int q = spec_.q;
  const int n = data.n();
  const Eigen::VectorXd mu = theta.head(q);
  const int slots = 1 + *std::max_element(data.meta.begin(), data.meta.end());
  const auto inverses = covariance_inverses(theta, slots);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(2 * q, 2 * q);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& a = inverses[data.meta[i]];
    const Eigen::VectorXd r = data.observations.row(i).transpose() - mu;
    const Eigen::VectorXd v = a * r;
    hess.topLeftCorner(q, q) += a;
    for (int j = 0; j < q; ++j) {
      // d^2 l / d mu d Sigma_jj
      hess.block(0, q + j, q, 1) += v(j) * a.col(j);
      for (int k = j; k < q; ++k) {
        const double entry = 0.5 * (-a(j, k) * a(j, k) + 2.0 * v(j) * v(k) * a(j, k));
        hess(q + j, q + k) += entry;
        if (k != j) hess(q + k, q + j) += entry;
      }
    }
  }
  hess.bottomLeftCorner(q, q) = hess.topRightCorner(q, q).transpose();
  return hess;
}

FimMatrix SpnModel::expected_fim(const Eigen::VectorXd& theta, int n) const {
  const int q = spec_.q;
  const auto inverses = covariance_inverses(theta, n);
  Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(2 * q, 2 * q);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& a = inverses[i];
    fim.topLeftCorner(q, q) += a;
    for (int j = 0; j < q; ++j) {
      for (int k = j; k < q; ++k) {
        const double entry = 0.5 * a(j, k) * a(j, k);
        fim(q + j, q + k) += entry;
        if (k != j) fim(q + k, q + j) += entry;
      }
    }
  }
  fim /= double(n);
  return FimMatrix(fim, FimKind::Expected, parameter_template(theta), n);
}

Dataset SpnModel::sample(int n, const Eigen::VectorXd& theta,
                         std::uint64_t seed) const {
  const int q = spec_.q;
  if (n > spec_.n()) throw ValidationError("SpnModel::sample: n exceeds noise schedule");
  const Eigen::VectorXd mu = theta.head(q);
  const Eigen::VectorXd sigma_diag = theta.tail(q);
  Rng rng(seed);
  Eigen::MatrixXd obs(n, q);
  Eigen::VectorXd z(q);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd cov = spec_.noise_covs[i];
    cov.diagonal() += sigma_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NotPositiveDefiniteError("SpnModel::sample: covariance not PD");
    }
    for (int j = 0; j < q; ++j) z(j) = rng.normal();
    obs.row(i) = (mu + Eigen::MatrixXd(llt.matrixL()) * z).transpose();
  }
  return Dataset(std::move(obs));
}

Eigen::VectorXd SpnModel::clamp_to_feasible(Eigen::VectorXd theta) const {
  for (int j = spec_.q; j < 2 * spec_.q; ++j) {
    theta(j) = std::max(theta(j), kSigmaFloor);
  }
  return theta;
}

bool SpnModel::on_boundary(const Eigen::VectorXd& theta) const {
  for (int j = spec_.q; j < 2 * spec_.q; ++j) {
    if (theta(j) <= kSigmaFloor) return true;
  }
  return false;
}

Eigen::VectorXd SpnModel::moment_init(const Dataset& data) const {
  const int q = spec_.q;
  Eigen::VectorXd theta(2 * q);
  theta.head(q) = data.observations.colwise().mean();
  double mean_noise_diag = 0.0;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd r =
        data.observations.row(i).transpose() - theta.head(q);
    var += r.cwiseProduct(r);
    mean_noise_diag += spec_.noise_covs[data.meta[i]].trace() / q;
  }
  var /= double(data.n());
  mean_noise_diag /= double(data.n());
  theta.tail(q) = (var.array() - mean_noise_diag).max(kSigmaFloor).matrix();
  return theta;
}

}  // namespace fimci
