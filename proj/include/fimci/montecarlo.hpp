#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fimci/estimation.hpp"
#include "fimci/model.hpp"

namespace fimci {

enum class ModelId { GaussMix, Spn1d, Spn4d, Ssm };

std::string model_id_name(ModelId id);
ModelId model_id_from_name(const std::string& name);

struct ExperimentConfig {
  ModelId model_id = ModelId::GaussMix;
  Eigen::VectorXd theta_star;
  int n = 0;
  int replications = 0;
  std::uint64_t master_seed = 0;
  double alpha = 0.05;
  SolverOptions solver;
  int threads = 1;

  void validate() const;
};

/// Builds the model an ExperimentConfig refers to. The 4-d signal-plus-noise
/// U matrix is drawn once here from a master-seed-derived stream, freezing
/// the noise schedule across replications.
std::unique_ptr<LikelihoodModel> make_model(const ExperimentConfig& config);

enum class ExclusionReason { None, NotConverged, NonPd };

std::string exclusion_reason_name(ExclusionReason reason);

struct ReplicationRecord {
  int rep_index = 0;
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd hinv_diag;
  Eigen::VectorXd finv_diag;
  Eigen::MatrixXd hinv_full;
  Eigen::MatrixXd finv_full;
  bool excluded = false;
  ExclusionReason exclusion_reason = ExclusionReason::None;
  // Solver diagnostics carried into records.csv.
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
  SolverFlag flags = SolverFlag::None;
};

struct MseResult {
  Eigen::VectorXd mse_h;
  Eigen::VectorXd mse_f;
  Eigen::VectorXd ratio;
  std::vector<bool> ratio_overflow;  // mse_f == 0 with mse_h > 0
};

struct ExperimentReport {
  Eigen::MatrixXd v_n;
  Eigen::MatrixXd typical_hinv;
  Eigen::MatrixXd typical_finv;
  Eigen::VectorXd mse_h;
  Eigen::VectorXd mse_f;
  Eigen::VectorXd ratio;
  int included_count = 0;
  int excluded_count = 0;
  std::optional<Eigen::VectorXd> reliability;
  std::vector<std::string> component_names;
};

/// Runs config.replications independent replications (simulate at theta_star,
/// fit, evaluate and invert both FIMs at the estimate). Replication r draws
/// every stream from hash(master_seed, r), so records are identical no matter
/// how work is distributed over threads. Per-replication failures become
/// exclusion flags.
std::vector<ReplicationRecord> run_replications(const ExperimentConfig& config);

/// n times the unbiased sample covariance of the estimates.
Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& estimates,
                                  int n);

enum class TypicalKind { HInv, FInv };

/// The included record's inverse whose Frobenius distance to v_n is the
/// median; even counts resolve to the lower median.
Eigen::MatrixXd typical_matrix(const std::vector<ReplicationRecord>& records,
                               const Eigen::MatrixXd& v_n, TypicalKind which);

/// Per-component MSEs of the approximate confidence levels against the
/// nominal 1 - alpha, and their H/F ratio. `alpha` is the per-component
/// significance level.
MseResult mse_ratio(const std::vector<ReplicationRecord>& records,
                    const Eigen::MatrixXd& v_n, double alpha);

/// Aggregates records into the report (V_n over included replications,
/// typical matrices, MSEs, counts).
ExperimentReport build_report(const ExperimentConfig& config,
                              const std::vector<ReplicationRecord>& records);

/// Footnote-style stability diagnostic: repeats the whole V_n estimation
/// outer_repeats times on independent streams, takes the first estimate as
/// the reference, and returns the mean relative error of each diagonal entry
/// across the remaining estimates.
Eigen::VectorXd covariance_reliability(const ExperimentConfig& config,
                                       int outer_repeats);

}  // namespace fimci
