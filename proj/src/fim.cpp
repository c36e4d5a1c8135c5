#include "fimci/fim.hpp"

#include <Eigen/Eigenvalues>

#include "fimci/errors.hpp"

namespace fimci {

FimMatrix::FimMatrix(Eigen::MatrixXd m, FimKind k, ParameterVector at, int n)
    : entries(std::move(m)), kind(k), at_parameter(std::move(at)), sample_size(n) {
  if (entries.rows() != entries.cols() || entries.rows() != at_parameter.dim()) {
    throw ValidationError("FimMatrix: shape does not match parameter dimension");
  }
  const double scale = entries.cwiseAbs().maxCoeff();
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (scale > 0 ? scale : 1.0)) {
    throw ValidationError("FimMatrix: entries not symmetric within tolerance");
  }
  if (sample_size < 1) throw ValidationError("FimMatrix: sample_size must be >= 1");
}

FimInverse invert_spd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("invert_fim: eigendecomposition failed");
  }
  const Eigen::VectorXd& eig = solver.eigenvalues();
  const double min_eig = eig.minCoeff();
  const double max_eig = eig.maxCoeff();
  if (min_eig <= 0.0) {
    throw NotPositiveDefiniteError("invert_fim: matrix has a non-positive eigenvalue");
  }
  FimInverse result;
  result.rcond = min_eig / max_eig;
  result.ill_conditioned = result.rcond < 1e-12;
  const Eigen::MatrixXd& v = solver.eigenvectors();
  result.inverse = v * eig.cwiseInverse().asDiagonal() * v.transpose();
  // Exact symmetry of the output, independent of rounding in the product.
  result.inverse = ((result.inverse + result.inverse.transpose()) * 0.5).eval();
  return result;
}

FimInverse invert_fim(const FimMatrix& fim) { return invert_spd(fim.entries); }

}  // namespace fimci
