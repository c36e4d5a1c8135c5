#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fimci/errors.hpp"
#include "fimci/report_io.hpp"

using namespace fimci;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fimci_test_" + std::to_string(std::rand()) +
            std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("presets cover the numerical tables") {
  const auto& presets = experiment_presets();
  for (const char* name :
       {"table1_case1", "table1_case2", "table1_case3", "table2_case1",
        "table3_case1", "table4_case1", "table4_case2", "table5_case1",
        "table5_case2"}) {
    CHECK(presets.count(name) == 1);
  }

  const ExperimentConfig& t1 = presets.at("table1_case1");
  CHECK(t1.model_id == ModelId::GaussMix);
  CHECK(t1.theta_star(0) == doctest::Approx(0.5));
  CHECK(t1.theta_star(1) == doctest::Approx(0.0));
  CHECK(t1.theta_star(2) == doctest::Approx(4.0));
  CHECK(t1.n == 50);
  CHECK(t1.replications == 1000);

  const ExperimentConfig& t3 = presets.at("table3_case1");
  CHECK(t3.model_id == ModelId::Spn1d);
  CHECK(t3.n == 1000);

  const ExperimentConfig& t5 = presets.at("table5_case2");
  CHECK(t5.model_id == ModelId::Ssm);
  CHECK(t5.n == 100);

  // Aliases resolve to case 1.
  CHECK(resolve_experiment("table4").n == presets.at("table4_case1").n);
}

TEST_CASE("config files parse, validate, and reject unknown keys") {
  TempDir dir;
  const fs::path good = dir.path / "good.json";
  write_file(good, R"({
    "model": "gaussmix",
    "theta_star": [0.5, 0.0, 4.0],
    "n": 50,
    "replications": 100,
    "master_seed": 7,
    "alpha": 0.05,
    "solver": {"gradient_tolerance": 1e-8, "initializer": "true_perturbed"}
  })");
  const ExperimentConfig config = parse_config(good);
  CHECK(config.model_id == ModelId::GaussMix);
  CHECK(config.n == 50);
  CHECK(config.replications == 100);
  CHECK(config.master_seed == 7);
  CHECK(config.solver.gradient_tolerance == doctest::Approx(1e-8));

  // replications = 1 violates the invariant.
  const fs::path bad_reps = dir.path / "bad_reps.json";
  write_file(bad_reps, R"({"model": "gaussmix", "theta_star": [0.5, 0, 4],
                           "n": 50, "replications": 1})");
  CHECK_THROWS_AS(parse_config(bad_reps), ValidationError);

  // Unknown key is an error naming the key.
  const fs::path unknown = dir.path / "unknown.json";
  write_file(unknown, R"({"model": "gaussmix", "theta_star": [0.5, 0, 4],
                          "n": 50, "replications": 10, "foo": 1})");
  try {
    parse_config(unknown);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
  }

  // Malformed JSON carries line/column.
  const fs::path broken = dir.path / "broken.json";
  write_file(broken, "{\n  \"model\": \"gaussmix\",\n  oops\n}");
  try {
    parse_config(broken);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 2);
  }
}

TEST_CASE("shortest round-trip formatting") {
  for (double v : {0.1, 1.0 / 3.0, 426.24, 6.0e-5, 1.0843e-4, 1e300, -7.25}) {
    const std::string text = format_double(v);
    CHECK(std::stod(text) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("end-to-end run writes the documented files and is deterministic") {
  ExperimentConfig config;
  config.model_id = ModelId::GaussMix;
  config.theta_star = Eigen::Vector3d(0.5, 0.0, 4.0);
  config.n = 40;
  config.replications = 30;
  config.master_seed = 99;

  TempDir dir1, dir2;
  RunFlags flags;
  flags.quiet = true;
  flags.experiment_name = "unit";

  flags.out_dir = dir1.path;
  config.threads = 1;
  const int code1 = run_experiment(config, flags);

  flags.out_dir = dir2.path;
  config.threads = 3;
  const int code2 = run_experiment(config, flags);

  CHECK(code1 == code2);
  for (const char* name :
       {"report.struct", "summary.csv", "records.csv", "table.txt",
        "manifest.struct"}) {
    CHECK(fs::exists(dir1.path / name));
  }

  // Byte-identical machine outputs across thread counts.
  CHECK(read_file(dir1.path / "summary.csv") ==
        read_file(dir2.path / "summary.csv"));
  CHECK(read_file(dir1.path / "records.csv") ==
        read_file(dir2.path / "records.csv"));

  // records.csv row count = replications + header.
  const std::string records = read_file(dir1.path / "records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') ==
        config.replications + 1);

  // summary.csv schema is pinned.
  const std::string summary = read_file(dir1.path / "summary.csv");
  CHECK(summary.rfind("component,mse_h,mse_f,ratio\n", 0) == 0);

  // Report round-trip through the machine file.
  const ExperimentReport report = read_report(dir1.path / "report.struct");
  CHECK(report.included_count + report.excluded_count == config.replications);

  TempDir dir3;
  RunManifest manifest;
  manifest.config = config;
  manifest.artifact_version = "0.1.0";
  manifest.worker_count = 1;
  std::vector<ReplicationRecord> no_records;
  const WrittenFiles files =
      write_report(report, no_records, manifest, dir3.path);
  const ExperimentReport again = read_report(files.report);
  CHECK((again.v_n - report.v_n).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.mse_h - report.mse_h).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.mse_f - report.mse_f).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.ratio - report.ratio).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.typical_hinv - report.typical_hinv).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.component_names == report.component_names);

  // Manifest replay: parsing the manifest reproduces the config.
  const ExperimentConfig replay = parse_config(files.manifest);
  CHECK(replay.model_id == config.model_id);
  CHECK(replay.n == config.n);
  CHECK(replay.replications == config.replications);
  CHECK(replay.master_seed == config.master_seed);
  CHECK((replay.theta_star - config.theta_star).cwiseAbs().maxCoeff() == 0.0);
}
