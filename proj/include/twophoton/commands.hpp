#pragma once

#include <optional>
#include <filesystem>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "twophoton/analysis.hpp"
#include "twophoton/config.hpp"
#include "twophoton/detection.hpp"

namespace twophoton {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool force = false;               // overwrite outputs written under another config hash
  std::vector<double> windows;      // s; empty -> config.windows
  std::ostream* log = nullptr;      // progress and warnings
};

/// Validated pipeline for a config; every inconsistency becomes ConfigError.
PipelineConfig build_pipeline(const ExperimentConfig& config);

/// Refuses (ConfigError) when `path` exists and carries a different config hash.
void guard_output(const std::filesystem::path& path, const std::string& hash, bool force);

struct HistogramRun {
  TacHistogram histogram;
  std::optional<PeakFit> peaks;  // LS, central, SL; empty when the fit fails
  std::filesystem::path file;
};

/// generate_events -> acquire_histogram -> histogram.csv (and events.csv when enabled).
HistogramRun cmd_histogram(const ExperimentConfig& config, const RunOptions& options);

struct WindowRun {
  double window_width;
  FringeScan scan;
  VisibilityReport report;
  std::filesystem::path scan_file;
  std::filesystem::path report_file;
};

/// One corpus over the scan offsets, re-gated for every window.
std::vector<WindowRun> cmd_fringes(const ExperimentConfig& config, const RunOptions& options);

/// Analytic quantum (narrow, side, wide), classical closed form and both
/// Monte Carlo estimates on a grid of pump phases; written to compare.json.
nlohmann::json cmd_compare(const ExperimentConfig& config, const RunOptions& options);

nlohmann::json to_json(const VisibilityReport& report);

}  // namespace twophoton
