#include "fimci/ssm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "fimci/errors.hpp"
#include "fimci/rng.hpp"

namespace fimci {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kInnovationVarFloor = 1e-300;
constexpr double kQFloor = 1e-10;

void symmetrize(Eigen::MatrixXd& m) { m = ((m + m.transpose()) * 0.5).eval(); }

// PSD square root with eigenvalue clipping; accepts singular covariances
// (P0 = 0 in the paper's configuration).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  Eigen::VectorXd eig = solver.eigenvalues().cwiseMax(0.0);
  return solver.eigenvectors() * eig.cwiseSqrt().asDiagonal() *
         solver.eigenvectors().transpose();
}

void check_psd(const Eigen::MatrixXd& m, const char* label) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const double min_eig = solver.eigenvalues().minCoeff();
  const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  if (min_eig < -1e-9 * scale) {
    throw FilterDivergenceError(std::string(label) +
                                " lost positive semidefiniteness");
  }
}

}  // namespace

SsmSpec paper_ssm_spec() {
  SsmSpec spec;
  spec.A = Eigen::MatrixXd(3, 3);
  spec.A << 0.0, 1.0, 0.0,
            0.0, 0.0, 1.0,
            0.8, 0.8, -0.8;
  spec.C = Eigen::MatrixXd(1, 3);
  spec.C << 1.0, 0.0, 0.0;
  spec.R = Eigen::MatrixXd::Constant(1, 1, 1.0);
  spec.mu0 = Eigen::VectorXd::Zero(3);
  spec.P0 = Eigen::MatrixXd::Zero(3, 3);
  return spec;
}

SsmModel::SsmModel(SsmSpec spec) : spec_(std::move(spec)) {
  const int l = spec_.l();
  if (l < 1 || spec_.A.cols() != l) throw ValidationError("SsmModel: A must be square");
  if (spec_.m() != 1) {
    throw ValidationError("SsmModel: only scalar observations (m = 1) are supported");
  }
  if (spec_.C.cols() != l) throw ValidationError("SsmModel: C shape mismatch");
  if (spec_.R.rows() != 1 || spec_.R.cols() != 1 || !(spec_.R(0, 0) > 0.0)) {
    throw ValidationError("SsmModel: R must be 1x1 positive");
  }
  if (spec_.mu0.size() != l || spec_.P0.rows() != l || spec_.P0.cols() != l) {
    throw ValidationError("SsmModel: initial moments shape mismatch");
  }
  if ((spec_.P0 - spec_.P0.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("SsmModel: P0 not symmetric");
  }
}

ParameterVector SsmModel::parameter_template(const Eigen::VectorXd& values) const {
  const int l = spec_.l();
  std::vector<std::string> names;
  for (int j = 1; j <= l; ++j) {
    names.push_back("q" + std::to_string(j) + std::to_string(j));
  }
  const double inf = std::numeric_limits<double>::infinity();
  return ParameterVector(values, names, Eigen::VectorXd::Zero(l),
                         Eigen::VectorXd::Constant(l, inf));
}

FilterTrace SsmModel::kalman_filter(const Dataset& data,
                                    const Eigen::VectorXd& theta) const {
  const int l = spec_.l();
  const int n = data.n();
  const Eigen::RowVectorXd c = spec_.C.row(0);
  const double r = spec_.R(0, 0);
  const Eigen::MatrixXd q = theta.asDiagonal();

  FilterTrace trace;
  trace.innovations.resize(n);
  trace.innovation_vars.resize(n);
  trace.gains.reserve(n);
  trace.predicted_covs.reserve(n);
  trace.filtered_covs.reserve(n);

  Eigen::VectorXd x = spec_.mu0;
  Eigen::MatrixXd p = spec_.P0;
  double loglik = 0.0;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(l, l);

  for (int t = 0; t < n; ++t) {
    x = spec_.A * x;
    p = spec_.A * p * spec_.A.transpose() + q;
    symmetrize(p);
    const Eigen::MatrixXd p_pred = p;

    const double s = c * p * c.transpose() + r;
    if (!(s > kInnovationVarFloor) || !std::isfinite(s)) {
      throw FilterDivergenceError("kalman_filter: innovation variance not positive at t=" +
                                  std::to_string(t + 1));
    }
    const double eps = data.observations(t, 0) - c * x;
    const Eigen::VectorXd k = p * c.transpose() / s;

    x += k * eps;
    if (spec_.joseph_update) {
      const Eigen::MatrixXd ikc = identity - k * c;
      p = ikc * p * ikc.transpose() + k * r * k.transpose();
    } else {
      p -= k * (c * p);
    }
    symmetrize(p);
    check_psd(p, "kalman_filter: filtered covariance");

    trace.innovations(t) = eps;
    trace.innovation_vars(t) = s;
    trace.gains.push_back(k);
    trace.predicted_covs.push_back(p_pred);
    trace.filtered_covs.push_back(p);
    loglik -= 0.5 * (kLog2Pi + std::log(s) + eps * eps / s);
  }
  trace.loglik = loglik;
  return trace;
}

double SsmModel::nll(const Dataset& data, const Eigen::VectorXd& theta) const {
  return derivatives(data, theta, 0).nll;
}

Eigen::VectorXd SsmModel::nll_gradient(const Dataset& data,
                                       const Eigen::VectorXd& theta) const {
  return derivatives(data, theta, 1).grad;
}

Eigen::MatrixXd SsmModel::nll_hessian(const Dataset& data,
                                      const Eigen::VectorXd& theta) const {
  return derivatives(data, theta, 2).hess;
}

SsmModel::Derivatives SsmModel::derivatives(const Dataset& data,
                                            const Eigen::VectorXd& theta,
                                            int order) const {
  const int l = spec_.l();
  const int p_dim = l;
  const int n = data.n();
  const Eigen::MatrixXd& a = spec_.A;
  const Eigen::RowVectorXd c = spec_.C.row(0);
  const double r = spec_.R(0, 0);

  const int npairs = p_dim * (p_dim + 1) / 2;
  auto pair_index = [p_dim](int i, int j) {
    if (i > j) std::swap(i, j);
    return i * p_dim - i * (i - 1) / 2 + (j - i);
  };

  Eigen::VectorXd x = spec_.mu0;
  Eigen::MatrixXd p = spec_.P0;
  std::vector<Eigen::VectorXd> dx(p_dim, Eigen::VectorXd::Zero(l));
  std::vector<Eigen::MatrixXd> dp(p_dim, Eigen::MatrixXd::Zero(l, l));
  std::vector<Eigen::VectorXd> d2x(npairs, Eigen::VectorXd::Zero(l));
  std::vector<Eigen::MatrixXd> d2p(npairs, Eigen::MatrixXd::Zero(l, l));

  double loglik = 0.0;
  Eigen::VectorXd dll = Eigen::VectorXd::Zero(p_dim);
  Eigen::MatrixXd d2ll = Eigen::MatrixXd::Zero(p_dim, p_dim);

  std::vector<Eigen::VectorXd> dk(p_dim);
  std::vector<double> ds(p_dim), deps(p_dim);

  for (int t = 0; t < n; ++t) {
    // Prediction step and its sensitivities.
    x = a * x;
    p = a * p * a.transpose();
    for (int i = 0; i < p_dim; ++i) {
      p(i, i) += theta(i);
      if (order >= 1) {
        dx[i] = a * dx[i];
        dp[i] = a * dp[i] * a.transpose();
        dp[i](i, i) += 1.0;
      }
    }
    symmetrize(p);
    if (order >= 2) {
      for (int k = 0; k < npairs; ++k) {
        d2x[k] = a * d2x[k];
        d2p[k] = a * d2p[k] * a.transpose();
      }
    }

    const double s = c * p * c.transpose() + r;
    if (!(s > kInnovationVarFloor) || !std::isfinite(s)) {
      throw FilterDivergenceError("ssm derivatives: innovation variance not positive");
    }
    const double eps = data.observations(t, 0) - c * x;
    const Eigen::VectorXd gain = p * c.transpose() / s;

    loglik -= 0.5 * (kLog2Pi + std::log(s) + eps * eps / s);

    if (order >= 1) {
      for (int i = 0; i < p_dim; ++i) {
        ds[i] = c * dp[i] * c.transpose();
        deps[i] = -(c * dx[i])(0);
        dk[i] = (dp[i] * c.transpose() - gain * ds[i]) / s;
        dll(i) -= 0.5 * (ds[i] / s + 2.0 * eps * deps[i] / s -
                         eps * eps * ds[i] / (s * s));
      }
    }

    if (order >= 2) {
      for (int i = 0; i < p_dim; ++i) {
        for (int j = i; j < p_dim; ++j) {
          const int k = pair_index(i, j);
          const double d2s = c * d2p[k] * c.transpose();
          const double d2eps = -(c * d2x[k])(0);
          const double term =
              d2s / s - ds[i] * ds[j] / (s * s) +
              2.0 * (deps[i] * deps[j] + eps * d2eps) / s -
              2.0 * eps * (deps[i] * ds[j] + deps[j] * ds[i]) / (s * s) -
              eps * eps * d2s / (s * s) +
              2.0 * eps * eps * ds[i] * ds[j] / (s * s * s);
          d2ll(i, j) -= 0.5 * term;
          if (j != i) d2ll(j, i) = d2ll(i, j);

          // Second-order update step (needs first-order quantities at t).
          const Eigen::VectorXd d2k =
              (d2p[k] * c.transpose() - dk[i] * ds[j] - dk[j] * ds[i] - gain * d2s) / s;
          d2x[k] += d2k * eps + dk[i] * deps[j] + dk[j] * deps[i] + gain * d2eps;
          d2p[k] = d2p[k] - d2k * (c * p) - dk[i] * (c * dp[j]) -
                   dk[j] * (c * dp[i]) - gain * (c * d2p[k]);
          symmetrize(d2p[k]);
        }
      }
    }

    if (order >= 1) {
      for (int i = 0; i < p_dim; ++i) {
        dx[i] += dk[i] * eps + gain * deps[i];
        dp[i] = dp[i] - dk[i] * (c * p) - gain * (c * dp[i]);
        symmetrize(dp[i]);
      }
    }

    x += gain * eps;
    p -= gain * (c * p);
    symmetrize(p);
  }

  Derivatives result;
  result.nll = -loglik;
  result.grad = -dll;
  result.hess = -d2ll;
  return result;
}

FimMatrix SsmModel::expected_fim(const Eigen::VectorXd& theta, int n) const {
  const int l = spec_.l();
  const int p_dim = l;
  const Eigen::MatrixXd& a = spec_.A;
  const Eigen::RowVectorXd c = spec_.C.row(0);
  const double r = spec_.R(0, 0);

  const int npairs = p_dim * (p_dim + 1) / 2;
  auto pair_index = [p_dim](int i, int j) {
    if (i > j) std::swap(i, j);
    return i * p_dim - i * (i - 1) / 2 + (j - i);
  };

  Eigen::MatrixXd p = spec_.P0;
  std::vector<Eigen::MatrixXd> dp(p_dim, Eigen::MatrixXd::Zero(l, l));
  // psi[k] = E[ dx_filt_i dx_filt_j^T ] for the pair k = (i,j).
  std::vector<Eigen::MatrixXd> psi(npairs, Eigen::MatrixXd::Zero(l, l));
  Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(p_dim, p_dim);

  std::vector<Eigen::VectorXd> dk(p_dim);
  std::vector<double> ds(p_dim);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(l, l);

  for (int t = 0; t < n; ++t) {
    p = a * p * a.transpose();
    for (int i = 0; i < p_dim; ++i) {
      p(i, i) += theta(i);
      dp[i] = a * dp[i] * a.transpose();
      dp[i](i, i) += 1.0;
    }
    symmetrize(p);

    const double s = c * p * c.transpose() + r;
    if (!(s > kInnovationVarFloor) || !std::isfinite(s)) {
      throw FilterDivergenceError("ssm_expected_fim: innovation variance not positive");
    }
    const Eigen::VectorXd gain = p * c.transpose() / s;
    for (int i = 0; i < p_dim; ++i) {
      ds[i] = c * dp[i] * c.transpose();
      dk[i] = (dp[i] * c.transpose() - gain * ds[i]) / s;
    }

    const Eigen::MatrixXd transfer = (identity - gain * c) * a;
    for (int i = 0; i < p_dim; ++i) {
      for (int j = i; j < p_dim; ++j) {
        const int k = pair_index(i, j);
        // E[ deps_i deps_j ] with deps = -c A dx_filt(t-1).
        const double e_deps = (c * (a * psi[k] * a.transpose()) * c.transpose())(0);
        const double entry = 0.5 * ds[i] * ds[j] / (s * s) + e_deps / s;
        fim(i, j) += entry;
        if (j != i) fim(j, i) += entry;

        psi[k] = transfer * psi[k] * transfer.transpose() +
                 dk[i] * dk[j].transpose() * s;
      }
    }

    for (int i = 0; i < p_dim; ++i) {
      dp[i] = dp[i] - dk[i] * (c * p) - gain * (c * dp[i]);
      symmetrize(dp[i]);
    }
    p -= gain * (c * p);
    symmetrize(p);
  }

  fim /= double(n);
  symmetrize(fim);
  return FimMatrix(fim, FimKind::Expected, parameter_template(theta), n);
}

Dataset SsmModel::sample(int n, const Eigen::VectorXd& theta,
                         std::uint64_t seed) const {
  const int l = spec_.l();
  if (n < 1) throw ValidationError("SsmModel::sample: n must be >= 1");
  Rng rng(seed);
  const Eigen::MatrixXd p0_sqrt = psd_sqrt(spec_.P0);
  const Eigen::VectorXd q_sqrt = theta.cwiseMax(0.0).cwiseSqrt();
  const double r_sqrt = std::sqrt(spec_.R(0, 0));

  Eigen::VectorXd z(l);
  for (int j = 0; j < l; ++j) z(j) = rng.normal();
  Eigen::VectorXd x = spec_.mu0 + p0_sqrt * z;

  Eigen::MatrixXd obs(n, 1);
  for (int t = 0; t < n; ++t) {
    for (int j = 0; j < l; ++j) z(j) = rng.normal();
    x = spec_.A * x + q_sqrt.cwiseProduct(z);
    obs(t, 0) = (spec_.C.row(0) * x)(0) + r_sqrt * rng.normal();
  }
  return Dataset(std::move(obs));
}

Eigen::VectorXd SsmModel::clamp_to_feasible(Eigen::VectorXd theta) const {
  return theta.cwiseMax(kQFloor);
}

bool SsmModel::on_boundary(const Eigen::VectorXd& theta) const {
  return theta.minCoeff() <= kQFloor;
}

}  // namespace fimci
