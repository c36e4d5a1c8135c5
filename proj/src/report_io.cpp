#include "fimci/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fimci/errors.hpp"

namespace fimci {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kArtifactVersion = "0.1.0";

std::string format_sig4(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

Json double_to_json(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

double json_to_double(const Json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("expected a number for field '" + field + "'");
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(double_to_json(v(i)));
  return arr;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(double_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd json_to_vector(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError("field '" + field + "' must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = json_to_double(j[i], field);
  return v;
}

Eigen::MatrixXd json_to_matrix(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("field '" + field + "' must be a non-empty 2-d array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ValidationError("field '" + field + "' is ragged");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = json_to_double(j[r][c], field);
  }
  return m;
}

void check_keys(const Json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ValidationError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

std::string initializer_name(Initializer init) {
  switch (init) {
    case Initializer::TruePerturbed: return "true_perturbed";
    case Initializer::Moment: return "moment";
    case Initializer::User: return "user";
  }
  return "unknown";
}

Initializer initializer_from_name(const std::string& name) {
  if (name == "true_perturbed") return Initializer::TruePerturbed;
  if (name == "moment") return Initializer::Moment;
  if (name == "user") return Initializer::User;
  throw ValidationError("unknown initializer '" + name + "'");
}

Json config_to_json(const ExperimentConfig& config) {
  Json j;
  j["model"] = model_id_name(config.model_id);
  j["theta_star"] = vector_to_json(config.theta_star);
  j["n"] = config.n;
  j["replications"] = config.replications;
  j["master_seed"] = config.master_seed;
  j["alpha"] = config.alpha;
  j["threads"] = config.threads;
  Json solver;
  solver["max_iterations"] = config.solver.max_iterations;
  solver["gradient_tolerance"] = config.solver.gradient_tolerance;
  solver["step_halving_limit"] = config.solver.step_halving_limit;
  solver["initializer"] = initializer_name(config.solver.initializer);
  solver["perturbation_scale"] = config.solver.perturbation_scale;
  if (config.solver.user_theta0.size() > 0) {
    solver["user_theta0"] = vector_to_json(config.solver.user_theta0);
  }
  j["solver"] = std::move(solver);
  return j;
}

ExperimentConfig config_from_json(const Json& j, const std::string& origin) {
  if (!j.is_object()) throw ValidationError(origin + ": config must be an object");
  check_keys(j, {"model", "theta_star", "n", "replications", "master_seed",
                 "alpha", "threads", "solver"},
             origin);
  for (const char* required : {"model", "theta_star", "n", "replications"}) {
    if (!j.contains(required)) {
      throw ValidationError(origin + ": missing required key '" +
                            std::string(required) + "'");
    }
  }
  ExperimentConfig config;
  config.model_id = model_id_from_name(j.at("model").get<std::string>());
  config.theta_star = json_to_vector(j.at("theta_star"), "theta_star");
  config.n = j.at("n").get<int>();
  config.replications = j.at("replications").get<int>();
  if (j.contains("master_seed")) {
    config.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  if (j.contains("alpha")) config.alpha = j.at("alpha").get<double>();
  if (j.contains("threads")) config.threads = j.at("threads").get<int>();
  // Per-model solver defaults; a filter pass per gradient makes the
  // state-space tolerance the expensive one.
  config.solver.gradient_tolerance =
      config.model_id == ModelId::Ssm ? 1e-6 : 1e-8;
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    check_keys(s,
               {"max_iterations", "gradient_tolerance", "step_halving_limit",
                "initializer", "perturbation_scale", "user_theta0"},
               origin + ".solver");
    if (s.contains("max_iterations")) {
      config.solver.max_iterations = s.at("max_iterations").get<int>();
    }
    if (s.contains("gradient_tolerance")) {
      config.solver.gradient_tolerance = s.at("gradient_tolerance").get<double>();
    }
    if (s.contains("step_halving_limit")) {
      config.solver.step_halving_limit = s.at("step_halving_limit").get<int>();
    }
    if (s.contains("initializer")) {
      config.solver.initializer =
          initializer_from_name(s.at("initializer").get<std::string>());
    }
    if (s.contains("perturbation_scale")) {
      config.solver.perturbation_scale = s.at("perturbation_scale").get<double>();
    }
    if (s.contains("user_theta0")) {
      config.solver.user_theta0 = json_to_vector(s.at("user_theta0"), "user_theta0");
    }
  }
  config.validate();
  return config;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

ExperimentConfig config_from_json_text(const std::string& text,
                                       const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Convert the byte offset into line/column.
    int line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(origin + ": " + e.what(), line, column);
  }
  if (j.is_object() && j.contains("config")) {
    // Manifest replay: re-run the embedded configuration.
    return config_from_json(j.at("config"), origin + " (manifest)");
  }
  return config_from_json(j, origin);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_text(buffer.str(), path.string());
}

namespace {

ExperimentConfig make_preset(ModelId id, std::vector<double> theta, int n,
                             int reps) {
  ExperimentConfig config;
  config.model_id = id;
  config.theta_star =
      Eigen::Map<Eigen::VectorXd>(theta.data(), static_cast<int>(theta.size()));
  config.n = n;
  config.replications = reps;
  config.master_seed = 42;
  config.alpha = 0.05;
  config.solver.gradient_tolerance = id == ModelId::Ssm ? 1e-6 : 1e-8;
  return config;
}

}  // namespace

const std::map<std::string, ExperimentConfig>& experiment_presets() {
  static const std::map<std::string, ExperimentConfig> presets = [] {
    std::map<std::string, ExperimentConfig> m;
    m["table1_case1"] = make_preset(ModelId::GaussMix, {0.5, 0.0, 4.0}, 50, 1000);
    m["table1_case2"] = make_preset(ModelId::GaussMix, {0.5, 0.0, 2.0}, 100, 1000);
    m["table1_case3"] = make_preset(ModelId::GaussMix, {0.5, 0.0, 1.0}, 100, 1000);
    m["table2_case1"] = make_preset(ModelId::Spn1d, {10.0, 10.0}, 1000, 1000);
    // Table III reports the MSE view of the Table II experiment.
    m["table3_case1"] = m["table2_case1"];
    m["table4_case1"] = make_preset(
        ModelId::Spn4d, {0, 0, 0, 0, 1, 1, 1, 1}, 1000, 1000);
    m["table4_case2"] = make_preset(
        ModelId::Spn4d, {0, 0, 0, 0, 1, 1, 1, 1}, 2000, 1000);
    m["table5_case1"] = make_preset(ModelId::Ssm, {1.0, 1.0, 1.0}, 50, 1000);
    m["table5_case2"] = make_preset(ModelId::Ssm, {1.0, 1.0, 1.0}, 100, 1000);
    return m;
  }();
  return presets;
}

bool is_preset_name(const std::string& name) {
  const auto& presets = experiment_presets();
  if (presets.count(name)) return true;
  return presets.count(name + "_case1") > 0;
}

ExperimentConfig resolve_experiment(const std::string& name_or_path) {
  const auto& presets = experiment_presets();
  auto it = presets.find(name_or_path);
  if (it != presets.end()) return it->second;
  it = presets.find(name_or_path + "_case1");
  if (it != presets.end()) return it->second;
  if (std::filesystem::exists(name_or_path)) return parse_config(name_or_path);
  throw ValidationError("'" + name_or_path +
                        "' is neither a preset name nor a config file");
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string matrix_block(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << "   ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << format_sig4(m(r, c));
      if (c + 1 < m.cols()) out << "  ";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string render_table(const ExperimentReport& report,
                         const ExperimentConfig& config,
                         const std::string& experiment_name) {
  std::ostringstream out;
  out << "experiment: " << experiment_name << " (" << model_id_name(config.model_id)
      << ")\n";
  out << "true parameter: [";
  for (int j = 0; j < config.theta_star.size(); ++j) {
    out << format_sig4(config.theta_star(j));
    if (j + 1 < config.theta_star.size()) out << ", ";
  }
  out << "]\n";
  out << "sample size n: " << config.n << ", replications: "
      << (report.included_count + report.excluded_count) << " (included "
      << report.included_count << ", excluded " << report.excluded_count
      << "), alpha: " << format_sig4(config.alpha) << "\n\n";
  out << "n*cov(theta_hat):\n" << matrix_block(report.v_n) << "\n";
  out << "typical observed FIM inverse:\n" << matrix_block(report.typical_hinv)
      << "\n";
  out << "typical expected FIM inverse:\n" << matrix_block(report.typical_finv)
      << "\n";
  out << "component        mse_h        mse_f        ratio\n";
  for (std::size_t j = 0; j < report.component_names.size(); ++j) {
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %12s %12s %12s\n",
                  report.component_names[j].c_str(),
                  format_sig4(report.mse_h(j)).c_str(),
                  format_sig4(report.mse_f(j)).c_str(),
                  format_sig4(report.ratio(j)).c_str());
    out << line;
  }
  if (report.reliability) {
    out << "\nV_n diagonal mean relative error over outer repeats:";
    for (int j = 0; j < report.reliability->size(); ++j) {
      out << " " << format_sig4((*report.reliability)(j));
    }
    out << "\n";
  }
  return out.str();
}

WrittenFiles write_report(const ExperimentReport& report,
                          const std::vector<ReplicationRecord>& records,
                          const RunManifest& manifest,
                          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  WrittenFiles files;
  files.report = out_dir / "report.struct";
  files.summary_csv = out_dir / "summary.csv";
  files.records_csv = out_dir / "records.csv";
  files.table_txt = out_dir / "table.txt";
  files.manifest = out_dir / "manifest.struct";

  // report.struct
  Json j;
  j["component_names"] = report.component_names;
  j["v_n"] = matrix_to_json(report.v_n);
  j["typical_hinv"] = matrix_to_json(report.typical_hinv);
  j["typical_finv"] = matrix_to_json(report.typical_finv);
  j["mse_h"] = vector_to_json(report.mse_h);
  j["mse_f"] = vector_to_json(report.mse_f);
  j["ratio"] = vector_to_json(report.ratio);
  j["included_count"] = report.included_count;
  j["excluded_count"] = report.excluded_count;
  if (report.reliability) j["reliability"] = vector_to_json(*report.reliability);
  write_text_file(files.report, j.dump(2) + "\n");

  // summary.csv
  {
    std::ostringstream csv;
    csv << "component,mse_h,mse_f,ratio\n";
    for (std::size_t row = 0; row < report.component_names.size(); ++row) {
      csv << report.component_names[row] << ',' << format_double(report.mse_h(row))
          << ',' << format_double(report.mse_f(row)) << ','
          << format_double(report.ratio(row)) << "\n";
    }
    write_text_file(files.summary_csv, csv.str());
  }

  // records.csv
  {
    std::ostringstream csv;
    csv << "rep_index,excluded,exclusion_reason,converged,iterations,final_grad_norm";
    for (const auto& name : report.component_names) csv << ",theta_hat_" << name;
    for (const auto& name : report.component_names) csv << ",hinv_" << name;
    for (const auto& name : report.component_names) csv << ",finv_" << name;
    csv << "\n";
    const int p = static_cast<int>(report.component_names.size());
    for (const auto& record : records) {
      csv << record.rep_index << ',' << (record.excluded ? 1 : 0) << ','
          << exclusion_reason_name(record.exclusion_reason) << ','
          << (record.converged ? 1 : 0) << ',' << record.iterations << ','
          << format_double(record.final_grad_norm);
      for (int j = 0; j < p; ++j) {
        csv << ','
            << (record.theta_hat.size() == p ? format_double(record.theta_hat(j))
                                             : "nan");
      }
      for (int j = 0; j < p; ++j) {
        csv << ','
            << (record.hinv_diag.size() == p ? format_double(record.hinv_diag(j))
                                             : "nan");
      }
      for (int j = 0; j < p; ++j) {
        csv << ','
            << (record.finv_diag.size() == p ? format_double(record.finv_diag(j))
                                             : "nan");
      }
      csv << "\n";
    }
    write_text_file(files.records_csv, csv.str());
  }

  // table.txt
  write_text_file(files.table_txt,
                  render_table(report, manifest.config,
                               model_id_name(manifest.config.model_id)));

  // manifest.struct
  Json mj;
  mj["artifact_version"] = manifest.artifact_version;
  mj["config"] = config_to_json(manifest.config);
  mj["started_at"] = manifest.started_at;
  mj["finished_at"] = manifest.finished_at;
  mj["wall_time_seconds"] = manifest.wall_time_seconds;
  mj["worker_count"] = manifest.worker_count;
  write_text_file(files.manifest, mj.dump(2) + "\n");

  return files;
}

ExperimentReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0, 0);
  }
  ExperimentReport report;
  report.component_names = j.at("component_names").get<std::vector<std::string>>();
  report.v_n = json_to_matrix(j.at("v_n"), "v_n");
  report.typical_hinv = json_to_matrix(j.at("typical_hinv"), "typical_hinv");
  report.typical_finv = json_to_matrix(j.at("typical_finv"), "typical_finv");
  report.mse_h = json_to_vector(j.at("mse_h"), "mse_h");
  report.mse_f = json_to_vector(j.at("mse_f"), "mse_f");
  report.ratio = json_to_vector(j.at("ratio"), "ratio");
  report.included_count = j.at("included_count").get<int>();
  report.excluded_count = j.at("excluded_count").get<int>();
  if (j.contains("reliability")) {
    report.reliability = json_to_vector(j.at("reliability"), "reliability");
  }
  return report;
}

int run_experiment(const ExperimentConfig& config, const RunFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.config = config;
  manifest.artifact_version = kArtifactVersion;
  manifest.started_at = timestamp_utc();
  manifest.worker_count = config.threads;

  const std::vector<ReplicationRecord> records = run_replications(config);
  ExperimentReport report = build_report(config, records);
  if (flags.reliability_outer > 0) {
    report.reliability = covariance_reliability(config, flags.reliability_outer);
  }

  manifest.finished_at = timestamp_utc();
  manifest.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const WrittenFiles files =
      write_report(report, records, manifest, flags.out_dir);
  const std::string table = render_table(report, config, flags.experiment_name);
  write_text_file(files.table_txt, table);
  if (!flags.quiet) std::fputs(table.c_str(), stdout);

  const double exclusion_rate =
      double(report.excluded_count) /
      double(report.included_count + report.excluded_count);
  return exclusion_rate > 0.20 ? 2 : 0;
}

}  // namespace fimci
