#include "fimci/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "fimci/confidence.hpp"
#include "fimci/errors.hpp"
#include "fimci/gaussmix.hpp"
#include "fimci/rng.hpp"
#include "fimci/spn.hpp"
#include "fimci/ssm.hpp"

namespace fimci {

namespace {

// Stream tags for master-seed derivation.
constexpr std::uint64_t kStreamData = 0;
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamSpn4dU = 0x5350344455ULL;      // "SP4DU"
constexpr std::uint64_t kStreamReliability = 0x52454C4941ULL; // "RELIA"

}  // namespace

std::string model_id_name(ModelId id) {
  switch (id) {
    case ModelId::GaussMix: return "gaussmix";
    case ModelId::Spn1d: return "spn1d";
    case ModelId::Spn4d: return "spn4d";
    case ModelId::Ssm: return "ssm";
  }
  return "unknown";
}

ModelId model_id_from_name(const std::string& name) {
  if (name == "gaussmix") return ModelId::GaussMix;
  if (name == "spn1d") return ModelId::Spn1d;
  if (name == "spn4d") return ModelId::Spn4d;
  if (name == "ssm") return ModelId::Ssm;
  throw ValidationError("unknown model id '" + name + "'");
}

std::string exclusion_reason_name(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::None: return "none";
    case ExclusionReason::NotConverged: return "not_converged";
    case ExclusionReason::NonPd: return "non_pd";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ValidationError("ExperimentConfig: n must be >= 1");
  if (replications < 2) {
    throw ValidationError("ExperimentConfig: replications must be >= 2");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("ExperimentConfig: alpha must lie in (0,1)");
  }
  if (threads < 1) throw ValidationError("ExperimentConfig: threads must be >= 1");
  const int expected_dim = [&] {
    switch (model_id) {
      case ModelId::GaussMix: return 3;
      case ModelId::Spn1d: return 2;
      case ModelId::Spn4d: return 8;
      case ModelId::Ssm: return 3;
    }
    return 0;
  }();
  if (theta_star.size() != expected_dim) {
    throw ValidationError("ExperimentConfig: theta_star has wrong dimension for " +
                          model_id_name(model_id));
  }
}

std::unique_ptr<LikelihoodModel> make_model(const ExperimentConfig& config) {
  switch (config.model_id) {
    case ModelId::GaussMix:
      return std::make_unique<GaussMixModel>(GaussMixSpec{1.0});
    case ModelId::Spn1d:
      return std::make_unique<SpnModel>(make_spn_spec_1d(config.n));
    case ModelId::Spn4d:
      return std::make_unique<SpnModel>(make_spn_spec_4d(
          config.n, seed_mix(config.master_seed, kStreamSpn4dU)));
    case ModelId::Ssm:
      return std::make_unique<SsmModel>(paper_ssm_spec());
  }
  throw ValidationError("make_model: unknown model id");
}

namespace {

ReplicationRecord run_one(const LikelihoodModel& model,
                          const ExperimentConfig& config, int rep) {
  ReplicationRecord record;
  record.rep_index = rep;
  const std::uint64_t rep_seed = seed_mix(config.master_seed, rep);

  const Dataset data =
      model.sample(config.n, config.theta_star, seed_mix(rep_seed, kStreamData));

  SolverOptions options = config.solver;
  options.theta_star = config.theta_star;
  options.init_seed = seed_mix(rep_seed, kStreamInit);

  std::optional<EstimationResult> fit;
  try {
    fit = (config.model_id == ModelId::Ssm) ? search_mle(model, data, options)
                                            : newton_mle(model, data, options);
  } catch (const std::exception&) {
    record.excluded = true;
    record.exclusion_reason = ExclusionReason::NotConverged;
    record.theta_hat = Eigen::VectorXd::Zero(model.dim());
    return record;
  }

  record.theta_hat = fit->theta_hat.values();
  record.converged = fit->converged;
  record.iterations = fit->iterations;
  record.final_grad_norm = fit->final_grad_norm;
  record.flags = fit->flags;

  if (!fit->converged) {
    record.excluded = true;
    record.exclusion_reason = ExclusionReason::NotConverged;
    return record;
  }

  try {
    const FimMatrix observed = observed_fim(model, data, record.theta_hat);
    const FimMatrix expected = model.expected_fim(record.theta_hat, config.n);
    const FimInverse hinv = invert_fim(observed);
    const FimInverse finv = invert_fim(expected);
    // Report per-sample-normalized inverses on the V_n scale.
    record.hinv_full = hinv.inverse;
    record.finv_full = finv.inverse;
    record.hinv_diag = hinv.inverse.diagonal();
    record.finv_diag = finv.inverse.diagonal();
  } catch (const NotPositiveDefiniteError&) {
    record.excluded = true;
    record.exclusion_reason = ExclusionReason::NonPd;
    return record;
  } catch (const std::exception&) {
    record.excluded = true;
    record.exclusion_reason = ExclusionReason::NotConverged;
    return record;
  }
  return record;
}

}  // namespace

std::vector<ReplicationRecord> run_replications(const ExperimentConfig& config) {
  config.validate();
  const auto model = make_model(config);
  std::vector<ReplicationRecord> records(config.replications);

  const int workers = std::max(1, std::min(config.threads, config.replications));
  if (workers == 1) {
    for (int rep = 0; rep < config.replications; ++rep) {
      records[rep] = run_one(*model, config, rep);
    }
    return records;
  }

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= config.replications) return;
      records[rep] = run_one(*model, config, rep);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  return records;
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& estimates,
                                  int n) {
  const int count = static_cast<int>(estimates.size());
  if (count < 2) {
    throw InsufficientReplicationsError(
        "sample_covariance: need at least 2 estimates");
  }
  const int p = static_cast<int>(estimates.front().size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (const auto& est : estimates) mean += est;
  mean /= double(count);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (const auto& est : estimates) {
    const Eigen::VectorXd centered = est - mean;
    cov += centered * centered.transpose();
  }
  cov *= double(n) / double(count - 1);
  return cov;
}

Eigen::MatrixXd typical_matrix(const std::vector<ReplicationRecord>& records,
                               const Eigen::MatrixXd& v_n, TypicalKind which) {
  struct Entry {
    double distance;
    int rep_index;
    const Eigen::MatrixXd* matrix;
  };
  std::vector<Entry> entries;
  for (const auto& record : records) {
    if (record.excluded) continue;
    const Eigen::MatrixXd& m =
        which == TypicalKind::HInv ? record.hinv_full : record.finv_full;
    entries.push_back({(m - v_n).norm(), record.rep_index, &m});
  }
  if (entries.empty()) {
    throw NoIncludedReplicationsError("typical_matrix: no included replications");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.distance != b.distance ? a.distance < b.distance
                                    : a.rep_index < b.rep_index;
  });
  // Lower median for even counts.
  return *entries[(entries.size() - 1) / 2].matrix;
}

MseResult mse_ratio(const std::vector<ReplicationRecord>& records,
                    const Eigen::MatrixXd& v_n, double alpha) {
  const int p = static_cast<int>(v_n.rows());
  MseResult result;
  result.mse_h = Eigen::VectorXd::Zero(p);
  result.mse_f = Eigen::VectorXd::Zero(p);
  result.ratio = Eigen::VectorXd::Zero(p);
  result.ratio_overflow.assign(p, false);

  int included = 0;
  for (const auto& record : records) {
    if (record.excluded) continue;
    ++included;
    for (int j = 0; j < p; ++j) {
      // Reference level pi_j(V_n(j,j)) == 1 - alpha by the fixed-point
      // property; using it directly avoids one rounding step.
      const double err_h =
          (1.0 - alpha) - confidence_level(record.hinv_diag(j), v_n(j, j), alpha);
      const double err_f =
          (1.0 - alpha) - confidence_level(record.finv_diag(j), v_n(j, j), alpha);
      result.mse_h(j) += err_h * err_h;
      result.mse_f(j) += err_f * err_f;
    }
  }
  if (included == 0) {
    throw NoIncludedReplicationsError("mse_ratio: no included replications");
  }
  result.mse_h /= double(included);
  result.mse_f /= double(included);
  for (int j = 0; j < p; ++j) {
    if (result.mse_f(j) > 0.0) {
      result.ratio(j) = result.mse_h(j) / result.mse_f(j);
    } else if (result.mse_h(j) > 0.0) {
      result.ratio(j) = std::numeric_limits<double>::infinity();
      result.ratio_overflow[j] = true;
    } else {
      result.ratio(j) = 1.0;  // both exactly zero
    }
  }
  return result;
}

ExperimentReport build_report(const ExperimentConfig& config,
                              const std::vector<ReplicationRecord>& records) {
  ExperimentReport report;
  std::vector<Eigen::VectorXd> estimates;
  estimates.reserve(records.size());
  for (const auto& record : records) {
    if (!record.excluded) estimates.push_back(record.theta_hat);
  }
  report.included_count = static_cast<int>(estimates.size());
  report.excluded_count =
      static_cast<int>(records.size()) - report.included_count;

  report.v_n = sample_covariance(estimates, config.n);
  report.typical_hinv = typical_matrix(records, report.v_n, TypicalKind::HInv);
  report.typical_finv = typical_matrix(records, report.v_n, TypicalKind::FInv);

  const MseResult mse = mse_ratio(records, report.v_n, config.alpha);
  report.mse_h = mse.mse_h;
  report.mse_f = mse.mse_f;
  report.ratio = mse.ratio;

  const auto model = make_model(config);
  report.component_names =
      model->parameter_template(config.theta_star).names();
  return report;
}

Eigen::VectorXd covariance_reliability(const ExperimentConfig& config,
                                       int outer_repeats) {
  if (outer_repeats < 2) {
    throw InsufficientReplicationsError(
        "covariance_reliability: need at least 2 outer repeats");
  }
  const int p = static_cast<int>(config.theta_star.size());
  Eigen::MatrixXd reference;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(p);

  for (int k = 0; k < outer_repeats; ++k) {
    ExperimentConfig outer = config;
    outer.master_seed = seed_mix(config.master_seed, kStreamReliability, k);
    const auto records = run_replications(outer);
    std::vector<Eigen::VectorXd> estimates;
    for (const auto& record : records) {
      if (!record.excluded) estimates.push_back(record.theta_hat);
    }
    const Eigen::MatrixXd v_n = sample_covariance(estimates, outer.n);
    if (k == 0) {
      reference = v_n;
      continue;
    }
    for (int j = 0; j < p; ++j) {
      total(j) += std::fabs(v_n(j, j) - reference(j, j)) / std::fabs(reference(j, j));
    }
  }
  return total / double(outer_repeats - 1);
}

}  // namespace fimci
