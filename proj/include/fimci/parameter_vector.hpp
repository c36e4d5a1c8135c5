#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace fimci {

/// A named parameter point with box constraints. Values must lie strictly
/// inside their bounds; bounds default to the whole real line.
class ParameterVector {
 public:
  ParameterVector(Eigen::VectorXd values, std::vector<std::string> names);
  ParameterVector(Eigen::VectorXd values, std::vector<std::string> names,
                  Eigen::VectorXd lower_bounds, Eigen::VectorXd upper_bounds);

  int dim() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  double value(int j) const { return values_(j); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int j) const { return names_[j]; }
  const Eigen::VectorXd& lower_bounds() const { return lower_; }
  const Eigen::VectorXd& upper_bounds() const { return upper_; }

  /// Same names and bounds, different point.
  ParameterVector with_values(Eigen::VectorXd values) const;

 private:
  void validate() const;

  Eigen::VectorXd values_;
  std::vector<std::string> names_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// One batch of observations, row per observation. `meta` carries the
/// per-observation record index used by i.n.i.d. models (noise schedule slot);
/// it defaults to 0..n-1.
struct Dataset {
  Eigen::MatrixXd observations;
  std::vector<int> meta;

  Dataset() = default;
  explicit Dataset(Eigen::MatrixXd obs);
  Dataset(Eigen::MatrixXd obs, std::vector<int> meta_records);

  int n() const { return static_cast<int>(observations.rows()); }
  int q() const { return static_cast<int>(observations.cols()); }
};

}  // namespace fimci
