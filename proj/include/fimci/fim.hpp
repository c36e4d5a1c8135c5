#pragma once

#include <Eigen/Core>

#include "fimci/parameter_vector.hpp"

namespace fimci {

enum class FimKind { Observed, Expected };

/// A per-sample-normalized Fisher information matrix: for the observed kind,
/// the Hessian of the negative log-likelihood divided by n; for the expected
/// kind, its expectation under the model.
struct FimMatrix {
  Eigen::MatrixXd entries;
  FimKind kind;
  ParameterVector at_parameter;
  int sample_size;

  FimMatrix(Eigen::MatrixXd m, FimKind k, ParameterVector at, int n);

  int dim() const { return static_cast<int>(entries.rows()); }
};

struct FimInverse {
  Eigen::MatrixXd inverse;
  /// Reciprocal condition number, min(eigenvalue)/max(eigenvalue).
  double rcond;
  bool ill_conditioned;
};

/// Inverts a symmetric FIM through its eigendecomposition so that loss of
/// positive definiteness is detected by eigenvalue sign rather than by a
/// factorization breakdown. Throws NotPositiveDefiniteError if any eigenvalue
/// is <= 0; sets ill_conditioned when rcond < 1e-12.
FimInverse invert_fim(const FimMatrix& fim);

/// Same routine for a bare symmetric matrix (used by tests and interior
/// solver steps).
FimInverse invert_spd(const Eigen::MatrixXd& m);

}  // namespace fimci
