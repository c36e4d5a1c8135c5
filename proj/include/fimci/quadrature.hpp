#pragma once

#include <Eigen/Core>
#include <functional>

namespace fimci {

/// Vector-valued integrand: writes f(x) into `out` (size fixed by the caller).
using VectorIntegrand = std::function<void(double, Eigen::VectorXd&)>;

struct QuadratureResult {
  Eigen::VectorXd value;
  double error_estimate;
  int segments;
};

/// Adaptive Gauss-Kronrod (G7,K15) integration of a vector integrand over
/// [a,b]. Segments are bisected worst-error-first until every component's
/// accumulated error estimate falls below abs_tol. Throws QuadratureError if
/// the tolerance is not reached within max_segments.
QuadratureResult integrate_gk15(const VectorIntegrand& f, int dim, double a,
                                double b, double abs_tol,
                                int max_segments = 2000);

}  // namespace fimci
