#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twophoton/analysis.hpp"
#include "twophoton/detection.hpp"
#include "twophoton/engines.hpp"
#include "twophoton/spectral.hpp"

namespace twophoton {

/// Fine-offset scan: `points` offsets start + i (stop - start) / points,
/// i = 0 .. points-1 (stop excluded, so a whole number of periods tiles evenly).
struct ScanSpec {
  double start = 0.0;
  double stop = 2.0 * 427e-9;
  int points = 24;

  std::vector<double> offsets() const;
};

struct OutputSpec {
  std::string dir = "out";
  bool events = false;  // also write events.csv from `histogram`
};

struct ExperimentConfig {
  double pump_wavelength = 427e-9;
  SpectralShape shape = SpectralShape::Gaussian;
  double coherence_length = 100e-6;
  std::optional<double> delta_k;  // overrides coherence_length when set

  double path_short = 0.50;
  double path_long_base = 1.05;
  double path_long_offset = 0.0;
  double transmittance = 0.5;
  double mode_overlap = 1.0;
  ScanSpec scan;

  SourceRates rates;
  DetectorModel detector_a;
  DetectorModel detector_b;
  TacConfig tac;
  PztCalibration pzt;

  double window_width = 1e-9;
  std::vector<double> windows{5e-9, 1e-9};
  bool fit_period = false;
  double duration = 5.0;  // s per scan point (and for `histogram`)
  std::uint64_t seed = 1;
  unsigned chunks = 1;
  unsigned threads = 1;

  std::uint64_t compare_samples = 200'000;
  int compare_phases = 8;

  OutputSpec output;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and wrong types are ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Loads `.json` with the JSON parser and anything else as YAML.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text, bool json);

/// SHA-256 (first 16 hex digits) of the canonical JSON of every field that
/// affects results; output settings and the thread count are excluded.
std::string config_hash(const ExperimentConfig& config);

/// Commented YAML listing every key with its default.
void print_default_config(std::ostream& out);

/// Cross-field warnings (e.g. delta_L < 100 l_coh); empty when none.
std::vector<std::string> config_warnings(const ExperimentConfig& config);

}  // namespace twophoton
