#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fimci/montecarlo.hpp"

namespace fimci {

struct RunManifest {
  ExperimentConfig config;
  std::string artifact_version;
  std::string started_at;
  std::string finished_at;
  double wall_time_seconds = 0.0;
  int worker_count = 1;
};

/// Shortest round-trip decimal representation (locale-independent).
std::string format_double(double value);

/// Parses a JSON experiment config (or a manifest, whose embedded config is
/// replayed). Unknown keys are errors. Throws ParseError with line/column on
/// malformed input, ValidationError on schema violations.
ExperimentConfig parse_config(const std::filesystem::path& path);

ExperimentConfig config_from_json_text(const std::string& text,
                                       const std::string& origin);

/// Built-in experiment presets: tableK_caseJ maps one-to-one onto a column of
/// the corresponding numerical table, plus bare tableK aliases for case 1.
const std::map<std::string, ExperimentConfig>& experiment_presets();

/// Resolves a preset name or config-file path.
ExperimentConfig resolve_experiment(const std::string& name_or_path);

bool is_preset_name(const std::string& name);

struct WrittenFiles {
  std::filesystem::path report;
  std::filesystem::path summary_csv;
  std::filesystem::path records_csv;
  std::filesystem::path table_txt;
  std::filesystem::path manifest;
};

/// Writes report.struct, summary.csv, records.csv, table.txt and
/// manifest.struct into out_dir. Machine files use shortest round-trip
/// numbers; the human table uses 4 significant digits.
WrittenFiles write_report(const ExperimentReport& report,
                          const std::vector<ReplicationRecord>& records,
                          const RunManifest& manifest,
                          const std::filesystem::path& out_dir);

/// Reads back a report.struct file; inverse of the writer.
ExperimentReport read_report(const std::filesystem::path& path);

/// Human-readable table mirroring the paper's layout.
std::string render_table(const ExperimentReport& report,
                         const ExperimentConfig& config,
                         const std::string& experiment_name);

struct RunFlags {
  std::filesystem::path out_dir = "out";
  int reliability_outer = 0;  // 0 disables the reliability study
  std::string experiment_name = "custom";
  bool quiet = false;
};

/// Full pipeline: replications, aggregation, optional reliability study,
/// file output, table on stdout. Returns 0 on success, 2 when the exclusion
/// rate exceeds 20% (soft failure); hard errors propagate as exceptions.
int run_experiment(const ExperimentConfig& config, const RunFlags& flags);

}  // namespace fimci
