#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fimci/ssm.hpp"

namespace fimci::test {

// Log-density of the full observation vector of a linear-Gaussian state-space
// model, assembled densely: y ~ N(mean, Cov) with
//   mean_t = C A^t mu0,
//   Cov(y_s, y_t) = C Gamma(s,t) C^T + R delta_st,
//   Gamma(s,t) = A^s P0 (A^t)^T + sum_{k=1..min(s,t)} A^{s-k} Q (A^{t-k})^T.
// Supports any observation dimension m; complexity O((n m)^3).
inline double dense_gaussian_loglik(const SsmSpec& spec,
                                    const Eigen::VectorXd& q_diag,
                                    const Eigen::MatrixXd& y) {
  const int n = static_cast<int>(y.rows());
  const int m = static_cast<int>(y.cols());
  const int l = spec.l();

  std::vector<Eigen::MatrixXd> a_pow(n + 1);
  a_pow[0] = Eigen::MatrixXd::Identity(l, l);
  for (int t = 1; t <= n; ++t) a_pow[t] = spec.A * a_pow[t - 1];

  const Eigen::MatrixXd q = q_diag.asDiagonal();

  // State cross-covariances Gamma(s,t), 1-based times.
  std::vector<std::vector<Eigen::MatrixXd>> gamma(
      n + 1, std::vector<Eigen::MatrixXd>(n + 1));
  for (int s = 1; s <= n; ++s) {
    for (int t = s; t <= n; ++t) {
      Eigen::MatrixXd g = a_pow[s] * spec.P0 * a_pow[t].transpose();
      for (int k = 1; k <= s; ++k) {
        g += a_pow[s - k] * q * a_pow[t - k].transpose();
      }
      gamma[s][t] = g;
      if (t != s) gamma[t][s] = g.transpose();
    }
  }

  Eigen::VectorXd mean(n * m);
  Eigen::MatrixXd cov(n * m, n * m);
  for (int s = 1; s <= n; ++s) {
    mean.segment((s - 1) * m, m) = spec.C * a_pow[s] * spec.mu0;
    for (int t = 1; t <= n; ++t) {
      Eigen::MatrixXd block = spec.C * gamma[s][t] * spec.C.transpose();
      if (s == t) block += spec.R;
      cov.block((s - 1) * m, (t - 1) * m, m, m) = block;
    }
  }

  Eigen::VectorXd flat(n * m);
  for (int t = 0; t < n; ++t) flat.segment(t * m, m) = y.row(t).transpose();

  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd centered = flat - mean;
  const Eigen::VectorXd half = llt.matrixL().solve(centered);
  double log_det = 0.0;
  for (int i = 0; i < n * m; ++i) log_det += std::log(llt.matrixL()(i, i));
  constexpr double kLog2Pi = 1.8378770664093453;
  return -0.5 * (n * m * kLog2Pi + half.squaredNorm()) - log_det;
}

// Solves the discrete Lyapunov equation Pi = A Pi A^T + Q by vectorization;
// exact for stable A.
inline Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& a,
                                               const Eigen::MatrixXd& q) {
  const int l = static_cast<int>(a.rows());
  Eigen::MatrixXd kron(l * l, l * l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      for (int k = 0; k < l; ++k) {
        for (int h = 0; h < l; ++h) {
          kron(i * l + k, j * l + h) = a(i, j) * a(k, h);
        }
      }
    }
  }
  Eigen::VectorXd q_vec(l * l);
  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < l; ++k) q_vec(i * l + k) = q(i, k);
  }
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(l * l, l * l) - kron;
  const Eigen::VectorXd pi_vec = lhs.fullPivLu().solve(q_vec);
  Eigen::MatrixXd pi(l, l);
  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < l; ++k) pi(i, k) = pi_vec(i * l + k);
  }
  return pi;
}

}  // namespace fimci::test
