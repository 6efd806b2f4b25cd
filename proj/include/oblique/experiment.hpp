#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "oblique/config.hpp"

namespace oblique {

inline constexpr int kSummarySchemaVersion = 1;

struct RunOutcome {
  bool passed = false;
  /// Set when the experiment threw; kind() and what() of the error.
  std::string error_kind;
  std::string error_message;
  nlohmann::ordered_json summary;
  /// 0 when every row passes, 1 when a row fails, 2 when the experiment threw.
  int exit_code() const { return !error_kind.empty() ? 2 : (passed ? 0 : 1); }
};

/// Runs the experiment and writes its CSV files plus summary.json into
/// `out_dir` (created if needed). Module errors are caught and recorded.
/// Throws IoError when the directory cannot be written.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Pass/fail table of `dir`/summary.json, failing rows first. Throws IoError
/// ("no summary found") when the file is missing and ConfigError when it
/// cannot be parsed or has the wrong schema.
std::string render_report(const std::filesystem::path& dir);

}  // namespace oblique
