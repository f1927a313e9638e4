#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "twophoton/engines.hpp"
#include "twophoton/random.hpp"

namespace twophoton {

struct DetectorModel {
  double timing_jitter_sigma = 300e-12;  // s, Gaussian
  double dead_time = 50e-9;              // s, non-paralyzable
  double efficiency = 1.0;

  void validate() const;
};

struct TacConfig {
  double electrical_delay = 10e-9;  // added to the stop channel
  double range = 20e-9;
  int n_channels = 4096;

  void validate() const;
  /// Also requires electrical_delay >= path_delay and
  /// electrical_delay + path_delay < range, so all three peaks land in range.
  void validate_for(double path_delay) const;
};

/// Start-stop time-difference histogram over [0, range).
class TacHistogram {
 public:
  TacHistogram(double range, int n_channels, double duration, bool dead_time_free);

  double range() const noexcept { return range_; }
  int n_channels() const noexcept { return static_cast<int>(counts_.size()); }
  double bin_width() const noexcept { return range_ / static_cast<double>(counts_.size()); }
  double bin_center(int i) const noexcept { return (i + 0.5) * bin_width(); }
  double duration() const noexcept { return duration_; }
  bool dead_time_free() const noexcept { return dead_time_free_; }

  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept;

  /// Adds one start-stop interval; out-of-range values are ignored.
  void record(double interval) noexcept;

  /// Registered detector clicks over the acquisition.
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;

  /// Bin-wise sum for chunked acquisitions. Only legal when neither side
  /// used dead time (the dead-time state does not survive a chunk boundary).
  void merge(const TacHistogram& other);

 private:
  double range_;
  double duration_;
  bool dead_time_free_;
  std::vector<std::uint64_t> counts_;
};

/// Clicks registered by one detector: efficiency thinning, non-paralyzable
/// dead time on the true arrival times, then Gaussian timing jitter.
/// Returned times are sorted.
std::vector<double> register_clicks(std::span<const PhotonArrival> arrivals, Detector detector,
                                     const DetectorModel& model, Rng& rng);

/// Single-start / single-stop TAC: each A click starts the converter if it is
/// idle; the first B click with t_B + delay >= t_start stops it when the
/// interval is inside the range. The converter stays busy until the stop or,
/// without one, until start + range; starts arriving while busy are lost.
TacHistogram tac_histogram(std::span<const double> starts, std::span<const double> stops,
                           const TacConfig& tac, double duration, bool dead_time_free);

/// Detectors + TAC + MCA over a time-sorted event stream.
/// Throws PreconditionError when the arrivals are not sorted by time.
TacHistogram acquire_histogram(std::span<const PhotonArrival> arrivals, double duration,
                               const DetectorModel& detector_a, const DetectorModel& detector_b,
                               const TacConfig& tac, Rng& rng);
TacHistogram acquire_histogram(const EventStream& events, const DetectorModel& detector_a,
                               const DetectorModel& detector_b, const TacConfig& tac, Rng& rng);

/// Counts in the bins whose centers lie in [center - width/2, center + width/2].
/// DomainError when that window leaves the histogram range.
std::uint64_t gate_count(const TacHistogram& hist, double window_center, double window_width);

struct PeakCentroid {
  double position;    // s
  double std_error;   // s
  std::uint64_t counts;
};

/// Count-weighted mean of bin centers within +-half_width of the current
/// estimate, re-centred `iterations` times starting from `guess`.
PeakCentroid peak_centroid(const TacHistogram& hist, double guess, double half_width,
                           int iterations = 5);

struct PeakFit {
  std::vector<PeakCentroid> peaks;  // position, its standard error, fitted area (counts)
  double width;                     // common Gaussian sigma, s
  double background;                // flat floor, counts per bin
  double chi2;
  int dof;
};

/// Joint Poisson-weighted fit of Gaussians with a common width plus a flat
/// floor over [min(guesses) - half_width, max(guesses) + half_width].
/// Errors from the inverse Fisher matrix. When width_guess is below two bins
/// the peaks are unresolved by the binning and plain centroids are returned.
/// Throws FitError when the fit does not converge.
PeakFit fit_peaks(const TacHistogram& hist, std::span<const double> guesses, double width_guess,
                  double half_width);

/// CSV: a `# duration_s=...,config_hash=...` line, then `bin_center_s,count`.
void write_histogram_csv(std::ostream& out, const TacHistogram& hist, const std::string& config_hash);

}  // namespace twophoton
