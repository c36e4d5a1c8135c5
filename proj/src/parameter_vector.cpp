#include "fimci/parameter_vector.hpp"

#include <limits>
#include <numeric>
#include <unordered_set>

#include "fimci/errors.hpp"

namespace fimci {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ParameterVector::ParameterVector(Eigen::VectorXd values,
                                 std::vector<std::string> names)
    : ParameterVector(std::move(values), std::move(names),
                      Eigen::VectorXd(), Eigen::VectorXd()) {}

ParameterVector::ParameterVector(Eigen::VectorXd values,
                                 std::vector<std::string> names,
                                 Eigen::VectorXd lower_bounds,
                                 Eigen::VectorXd upper_bounds)
    : values_(std::move(values)),
      names_(std::move(names)),
      lower_(std::move(lower_bounds)),
      upper_(std::move(upper_bounds)) {
  if (lower_.size() == 0) lower_ = Eigen::VectorXd::Constant(values_.size(), -kInf);
  if (upper_.size() == 0) upper_ = Eigen::VectorXd::Constant(values_.size(), kInf);
  validate();
}

void ParameterVector::validate() const {
  const auto p = values_.size();
  if (p < 1) throw ValidationError("ParameterVector: dimension must be >= 1");
  if (static_cast<Eigen::Index>(names_.size()) != p ||
      lower_.size() != p || upper_.size() != p) {
    throw ValidationError("ParameterVector: names/bounds length mismatch");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) {
      throw ValidationError("ParameterVector: duplicate component name '" + name + "'");
    }
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(values_(j) > lower_(j) && values_(j) < upper_(j))) {
      throw ValidationError("ParameterVector: component '" + names_[j] +
                            "' not strictly inside its bounds");
    }
  }
}

ParameterVector ParameterVector::with_values(Eigen::VectorXd values) const {
  return ParameterVector(std::move(values), names_, lower_, upper_);
}

Dataset::Dataset(Eigen::MatrixXd obs) : observations(std::move(obs)) {
  meta.resize(observations.rows());
  std::iota(meta.begin(), meta.end(), 0);
  if (n() < 1 || q() < 1) throw ValidationError("Dataset: need n >= 1 and q >= 1");
}

Dataset::Dataset(Eigen::MatrixXd obs, std::vector<int> meta_records)
    : observations(std::move(obs)), meta(std::move(meta_records)) {
  if (n() < 1 || q() < 1) throw ValidationError("Dataset: need n >= 1 and q >= 1");
  if (static_cast<int>(meta.size()) != n()) {
    throw ValidationError("Dataset: meta length must equal n");
  }
}

}  // namespace fimci
