#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "fimci/errors.hpp"
#include "fimci/report_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo study of MLE confidence intervals built from "
               "observed vs expected Fisher information"};

  std::string experiment;
  int reps = -1;
  int n_override = -1;
  std::int64_t seed = -1;
  double alpha = -1.0;
  std::string out_dir = "out";
  int threads = 1;
  int reliability = 0;
  bool list_presets = false;
  bool quiet = false;

  app.add_option("--experiment", experiment,
                 "Preset name (e.g. table1_case1) or path to a config file");
  app.add_option("--reps", reps, "Override the number of replications");
  app.add_option("--n", n_override, "Override the sample size");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--alpha", alpha, "Override the significance level");
  app.add_option("--out", out_dir, "Output directory (default: out)");
  app.add_option("--threads", threads, "Worker threads for replications");
  app.add_option("--reliability", reliability,
                 "Run the V_n reliability study with this many outer repeats");
  app.add_flag("--list", list_presets, "List built-in presets and exit");
  app.add_flag("--quiet", quiet, "Suppress the table on stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_presets) {
      for (const auto& [name, config] : fimci::experiment_presets()) {
        std::printf("%-14s %-9s n=%-5d reps=%d\n", name.c_str(),
                    fimci::model_id_name(config.model_id).c_str(), config.n,
                    config.replications);
      }
      return 0;
    }
    if (experiment.empty()) {
      std::fprintf(stderr, "error: --experiment is required (try --list)\n");
      return 1;
    }

    fimci::ExperimentConfig config = fimci::resolve_experiment(experiment);
    if (reps > 0) config.replications = reps;
    if (n_override > 0) config.n = n_override;
    if (seed >= 0) config.master_seed = static_cast<std::uint64_t>(seed);
    if (alpha > 0.0) config.alpha = alpha;
    config.threads = threads;

    fimci::RunFlags flags;
    flags.out_dir = out_dir;
    flags.reliability_outer = reliability;
    flags.experiment_name = experiment;
    flags.quiet = quiet;
    return fimci::run_experiment(config, flags);
  } catch (const fimci::ParseError& e) {
    std::fprintf(stderr, "parse error (line %d, column %d): %s\n", e.line(),
                 e.column(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
