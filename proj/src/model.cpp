#include "fimci/model.hpp"

#include "fimci/errors.hpp"

namespace fimci {

Eigen::VectorXd LikelihoodModel::moment_init(const Dataset&) const {
  throw ValidationError("moment initializer not available for this model");
}

}  // namespace fimci
