#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fimci/confidence.hpp"
#include "fimci/estimation.hpp"
#include "fimci/fim.hpp"
#include "fimci/gaussmix.hpp"
#include "fimci/montecarlo.hpp"
#include "fimci/normal.hpp"
#include "fimci/report_io.hpp"
#include "fimci/spn.hpp"
#include "fimci/ssm.hpp"

namespace py = pybind11;
using namespace fimci;

namespace {

Dataset to_dataset(const Eigen::MatrixXd& obs) { return Dataset(obs); }

py::dict result_to_dict(const EstimationResult& result) {
  py::dict out;
  out["theta_hat"] = result.theta_hat.values();
  out["names"] = result.theta_hat.names();
  out["converged"] = result.converged;
  out["iterations"] = result.iterations;
  out["final_grad_norm"] = result.final_grad_norm;
  out["final_nll"] = result.final_nll;
  out["hessian_at_mle"] = result.hessian_at_mle;
  out["boundary"] = has_flag(result.flags, SolverFlag::Boundary);
  out["non_pd_hessian"] = has_flag(result.flags, SolverFlag::NonPdHessian);
  out["relabeled"] = has_flag(result.flags, SolverFlag::Relabeled);
  return out;
}

py::dict report_to_dict(const ExperimentReport& report) {
  py::dict out;
  out["component_names"] = report.component_names;
  out["v_n"] = report.v_n;
  out["typical_hinv"] = report.typical_hinv;
  out["typical_finv"] = report.typical_finv;
  out["mse_h"] = report.mse_h;
  out["mse_f"] = report.mse_f;
  out["ratio"] = report.ratio;
  out["included_count"] = report.included_count;
  out["excluded_count"] = report.excluded_count;
  if (report.reliability) out["reliability"] = *report.reliability;
  return out;
}

SolverOptions make_options(double gradient_tolerance, int max_iterations,
                           const Eigen::VectorXd& theta_star,
                           std::uint64_t init_seed) {
  SolverOptions options;
  options.gradient_tolerance = gradient_tolerance;
  options.max_iterations = max_iterations;
  options.theta_star = theta_star;
  options.init_seed = init_seed;
  return options;
}

ExperimentConfig config_with_overrides(const std::string& experiment, int reps,
                                       int n, std::int64_t seed, double alpha,
                                       int threads) {
  ExperimentConfig config = resolve_experiment(experiment);
  if (reps > 0) config.replications = reps;
  if (n > 0) config.n = n;
  if (seed >= 0) config.master_seed = static_cast<std::uint64_t>(seed);
  if (alpha > 0.0) config.alpha = alpha;
  config.threads = threads;
  return config;
}

}  // namespace

PYBIND11_MODULE(_fimci, m) {
  m.doc() = "Confidence-interval accuracy of observed vs expected Fisher "
            "information: models, solvers and Monte Carlo harness";

  // Core numerics.
  m.def("normal_cdf", &normal_cdf, py::arg("x"));
  m.def("normal_quantile", &normal_quantile, py::arg("p"));
  m.def("confidence_level", &confidence_level, py::arg("x"), py::arg("v_ref"),
        py::arg("alpha"));
  m.def(
      "confidence_interval",
      [](double t_hat, double var_est, int n, double alpha) {
        const ConfidenceInterval ci = confidence_interval(t_hat, var_est, n, alpha);
        return py::make_tuple(ci.lower, ci.upper, ci.nominal_level);
      },
      py::arg("t_hat"), py::arg("var_est"), py::arg("n"), py::arg("alpha"));
  m.def("bonferroni_split", &bonferroni_split, py::arg("alpha_total"), py::arg("p"));
  m.def(
      "invert_fim",
      [](const Eigen::MatrixXd& entries) {
        const FimInverse inv = invert_spd(entries);
        return py::make_tuple(inv.inverse, inv.rcond, inv.ill_conditioned);
      },
      py::arg("matrix"), "Inverse, reciprocal condition number, ill-conditioned flag");

  // Models.
  py::class_<GaussMixModel>(m, "GaussMixModel")
      .def(py::init([](double sigma) { return GaussMixModel(GaussMixSpec{sigma}); }),
           py::arg("sigma") = 1.0)
      .def("density",
           [](const GaussMixModel& model, double x, const Eigen::VectorXd& theta) {
             return model.density(x, theta);
           })
      .def("nll",
           [](const GaussMixModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) { return model.nll(to_dataset(obs), theta); })
      .def("nll_gradient",
           [](const GaussMixModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             return model.nll_gradient(to_dataset(obs), theta);
           })
      .def("nll_hessian",
           [](const GaussMixModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             return model.nll_hessian(to_dataset(obs), theta);
           })
      .def("expected_fim",
           [](const GaussMixModel& model, const Eigen::VectorXd& theta, int n) {
             return model.expected_fim(theta, n).entries;
           })
      .def("sample",
           [](const GaussMixModel& model, int n, const Eigen::VectorXd& theta,
              std::uint64_t seed) {
             return Eigen::MatrixXd(model.sample(n, theta, seed).observations);
           });

  py::class_<SpnModel>(m, "SpnModel")
      .def_static("schedule_1d",
                  [](int n) { return SpnModel(make_spn_spec_1d(n)); }, py::arg("n"))
      .def_static(
          "schedule_4d",
          [](int n, std::uint64_t seed) { return SpnModel(make_spn_spec_4d(n, seed)); },
          py::arg("n"), py::arg("seed"))
      .def("nll",
           [](const SpnModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) { return model.nll(to_dataset(obs), theta); })
      .def("nll_gradient",
           [](const SpnModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             return model.nll_gradient(to_dataset(obs), theta);
           })
      .def("nll_hessian",
           [](const SpnModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             return model.nll_hessian(to_dataset(obs), theta);
           })
      .def("expected_fim",
           [](const SpnModel& model, const Eigen::VectorXd& theta, int n) {
             return model.expected_fim(theta, n).entries;
           })
      .def("sample",
           [](const SpnModel& model, int n, const Eigen::VectorXd& theta,
              std::uint64_t seed) {
             return Eigen::MatrixXd(model.sample(n, theta, seed).observations);
           });

  py::class_<SsmModel>(m, "SsmModel")
      .def(py::init([]() { return SsmModel(paper_ssm_spec()); }))
      .def("kalman_filter",
           [](const SsmModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             const FilterTrace trace = model.kalman_filter(to_dataset(obs), theta);
             py::dict out;
             out["innovations"] = trace.innovations;
             out["innovation_vars"] = trace.innovation_vars;
             out["loglik"] = trace.loglik;
             return out;
           })
      .def("nll",
           [](const SsmModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) { return model.nll(to_dataset(obs), theta); })
      .def("nll_gradient",
           [](const SsmModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             return model.nll_gradient(to_dataset(obs), theta);
           })
      .def("nll_hessian",
           [](const SsmModel& model, const Eigen::MatrixXd& obs,
              const Eigen::VectorXd& theta) {
             return model.nll_hessian(to_dataset(obs), theta);
           })
      .def("expected_fim",
           [](const SsmModel& model, const Eigen::VectorXd& theta, int n) {
             return model.expected_fim(theta, n).entries;
           })
      .def("sample",
           [](const SsmModel& model, int n, const Eigen::VectorXd& theta,
              std::uint64_t seed) {
             return Eigen::MatrixXd(model.sample(n, theta, seed).observations);
           });

  // Solvers.
  m.def(
      "newton_mle",
      [](const GaussMixModel& model, const Eigen::MatrixXd& obs,
         const Eigen::VectorXd& theta_star, double tol, int max_iter,
         std::uint64_t init_seed) {
        return result_to_dict(newton_mle(model, to_dataset(obs),
                                         make_options(tol, max_iter, theta_star,
                                                      init_seed)));
      },
      py::arg("model"), py::arg("observations"), py::arg("theta_star"),
      py::arg("gradient_tolerance") = 1e-8, py::arg("max_iterations") = 200,
      py::arg("init_seed") = 0);
  m.def(
      "newton_mle_spn",
      [](const SpnModel& model, const Eigen::MatrixXd& obs,
         const Eigen::VectorXd& theta_star, double tol, int max_iter,
         std::uint64_t init_seed) {
        return result_to_dict(newton_mle(model, to_dataset(obs),
                                         make_options(tol, max_iter, theta_star,
                                                      init_seed)));
      },
      py::arg("model"), py::arg("observations"), py::arg("theta_star"),
      py::arg("gradient_tolerance") = 1e-8, py::arg("max_iterations") = 200,
      py::arg("init_seed") = 0);
  m.def(
      "search_mle_ssm",
      [](const SsmModel& model, const Eigen::MatrixXd& obs,
         const Eigen::VectorXd& theta_star, double tol, int max_iter,
         std::uint64_t init_seed) {
        return result_to_dict(search_mle(model, to_dataset(obs),
                                         make_options(tol, max_iter, theta_star,
                                                      init_seed)));
      },
      py::arg("model"), py::arg("observations"), py::arg("theta_star"),
      py::arg("gradient_tolerance") = 1e-6, py::arg("max_iterations") = 200,
      py::arg("init_seed") = 0);

  // Experiment harness.
  m.def("preset_names", [] {
    std::vector<std::string> names;
    for (const auto& [name, config] : experiment_presets()) names.push_back(name);
    return names;
  });
  m.def(
      "run_experiment_report",
      [](const std::string& experiment, int reps, int n, std::int64_t seed,
         double alpha, int threads) {
        const ExperimentConfig config =
            config_with_overrides(experiment, reps, n, seed, alpha, threads);
        const auto records = run_replications(config);
        return report_to_dict(build_report(config, records));
      },
      py::arg("experiment"), py::arg("reps") = -1, py::arg("n") = -1,
      py::arg("seed") = -1, py::arg("alpha") = -1.0, py::arg("threads") = 1,
      "Run a preset (or config path) in-process and return the report");
  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& out_dir, int reps,
         int n, std::int64_t seed, double alpha, int threads, int reliability) {
        const ExperimentConfig config =
            config_with_overrides(experiment, reps, n, seed, alpha, threads);
        RunFlags flags;
        flags.out_dir = out_dir;
        flags.reliability_outer = reliability;
        flags.experiment_name = experiment;
        flags.quiet = true;
        return run_experiment(config, flags);
      },
      py::arg("experiment"), py::arg("out_dir"), py::arg("reps") = -1,
      py::arg("n") = -1, py::arg("seed") = -1, py::arg("alpha") = -1.0,
      py::arg("threads") = 1, py::arg("reliability") = 0,
      "Run an experiment and write report files; returns the CLI exit code");

  m.attr("__version__") = "0.1.0";
}
