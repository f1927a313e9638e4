#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "twophoton/detection.hpp"
#include "twophoton/engines.hpp"
#include "twophoton/interferometer.hpp"
#include "twophoton/spectral.hpp"

namespace twophoton {

enum class Regime { Classical, Quantum };
enum class Verdict { ConsistentWithClassical, Nonclassical };

/// Classical when the window exceeds dL/c (all arrival classes summed),
/// Quantum when it is narrower. DomainError at equality or for dL <= 0.
Regime classify_regime(double window_width, const InterferometerGeometry& geometry);
Regime classify_regime(double window_width, double path_delay);

/// Visibility above which no classical field model can reach.
inline constexpr double kClassicalVisibilityBound = 0.5;

enum class PztInterpretation { PathDifference, MirrorDisplacement };

struct PztCalibration {
  double nm_per_volt = 46.0;
  double nm_per_volt_sigma = 8.0;
  PztInterpretation interpretation = PztInterpretation::PathDifference;
};

/// Path-difference offset for a PZT voltage. A mirror displacement changes
/// the Michelson path difference twice over.
double volts_to_offset(double volts, const PztCalibration& cal);
double offset_to_volts(double offset, const PztCalibration& cal);

struct FringePoint {
  double offset;  // m, change of delta_L
  double volts;
  std::uint64_t singles_a;  // counts over `duration`
  std::uint64_t singles_b;
  std::uint64_t coincidences;
  double duration;      // s
  double window_width;  // s
};

struct FringeScan {
  std::vector<FringePoint> points;
  std::optional<double> path_delay;  // dL / c, for the regime label

  /// Offsets strictly monotonic, durations >= 0.
  void validate() const;
};

/// Everything needed to turn a geometry into a histogram.
struct PipelineConfig {
  SpectralProfile profile;
  InterferometerGeometry geometry;
  SourceRates rates;
  DetectorModel detector_a;
  DetectorModel detector_b;
  TacConfig tac;
  PztCalibration pzt;
  unsigned chunks = 1;
  unsigned threads = 1;  // scan points acquired concurrently
};

/// One recorded corpus point: the full TAC histogram at one scan offset.
struct ScanRecord {
  double offset;
  double volts;
  TacHistogram histogram;
};

/// Acquires one histogram per offset. Point i uses seed stream (seed, i),
/// so the result does not depend on `threads`. Requires >= 8 offsets
/// covering at least one pump period (ConfigError otherwise).
std::vector<ScanRecord> acquire_scan(const PipelineConfig& config, std::span<const double> offsets,
                                     double duration, std::uint64_t seed);

/// Applies the coincidence window after the fact to a recorded corpus.
FringeScan gate_scan(std::span<const ScanRecord> records, double window_center, double window_width,
                     std::optional<double> path_delay = std::nullopt);

/// acquire_scan + gate_scan centered on the TAC electrical delay.
FringeScan run_fringe_scan(const PipelineConfig& config, std::span<const double> offsets,
                           double window_width, double duration, std::uint64_t seed);

/// Scan with Poisson counts of mean expected(offset) at each offset.
FringeScan poisson_scan(std::span<const double> offsets,
                        const std::function<double(double)>& expected_counts, double duration,
                        double window_width, Rng& rng);

struct VisibilityReport {
  double visibility;        // clamped to [0, 1]
  double raw_visibility;    // amplitude / baseline of the fit, unclamped
  double visibility_sigma;
  double period;            // m
  double period_sigma;      // 0 when locked
  bool period_locked;
  double phase;             // rad
  double baseline;          // counts
  double chi2;
  int dof;
  std::optional<Regime> regime;
  Verdict verdict;
};

/// Poisson-weighted least squares of the coincidences against
/// baseline * (1 - V cos(2 pi offset / period + phase)). The period is held
/// at `known_period` when given, otherwise scanned and refined. Sigmas come
/// from the inverse Fisher matrix. Verdict is Nonclassical iff
/// V - 2 sigma > 0.5. Throws FitError on non-convergence.
VisibilityReport fit_visibility(const FringeScan& scan, std::optional<double> known_period);

/// Chi-square flatness test of a series of counts against their mean;
/// returns the upper-tail p-value.
double flatness_p_value(std::span<const double> counts);
/// Upper-tail chi-square probability.
double chi2_survival(double chi2, double dof);

/// `offset_m,volts,singles_a,singles_b,coincidences,duration_s` after a
/// `# config_hash=...,window_width_s=...` line.
void write_scan_csv(std::ostream& out, const FringeScan& scan, const std::string& config_hash);

const char* to_string(Regime r) noexcept;
const char* to_string(Verdict v) noexcept;
const char* to_string(PztInterpretation p) noexcept;
PztInterpretation pzt_interpretation_from_string(const std::string& name);

}  // namespace twophoton
