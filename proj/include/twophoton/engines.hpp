#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "twophoton/interferometer.hpp"
#include "twophoton/random.hpp"
#include "twophoton/spectral.hpp"

namespace twophoton {

/// Source brightness and overall coincidence scale.
///
/// rc0 sets the coincidence normalization R_c = rc0 * <psi_f|psi_f>. The
/// generator realizes it with a per-photon collection efficiency
/// eta = sqrt(rc0 / pair_rate), so a pair is seen in coincidence with
/// probability eta^2 times its coincidence probability.
struct SourceRates {
  double pair_rate = 1.0e5;  // pairs / s
  double rc0 = 800.0;        // s^-1
  double singles_background = 1.0e4 - 8944.271909999159;  // s^-1 per detector

  /// Background chosen so that each detector's total singles equal
  /// `observed_singles` (pair photons contribute pair_rate * eta).
  static SourceRates from_observed_singles(double pair_rate, double rc0, double observed_singles);

  void validate() const;
  /// eta = sqrt(rc0 / pair_rate); ConfigError when it would exceed 1.
  double collection_efficiency() const;
};

/// Spectrally averaged interference factors at one geometry.
struct SpectralAverages {
  double pump_cos;  // cos(k_p dL)
  double residual;  // <cos((k_p - 2 k1) dL)>
  double signal_cos;  // <cos(k1 dL)>
  double idler_cos;   // <cos(k2 dL)>
};

/// Averages by Filon-Simpson quadrature over |Phi|^2.
SpectralAverages spectral_averages(const SpectralProfile& profile,
                                   const InterferometerGeometry& geometry);
/// Averages from the closed-form characteristic function of |Phi|^2.
SpectralAverages spectral_averages_closed_form(const SpectralProfile& profile,
                                               const InterferometerGeometry& geometry);

/// Coincidence rate when the window resolves the arrival-time classes:
/// only (S,S) + (L,L) counts. At T = 1/2: (rc0 / 4)(1 - mu cos k_p dL).
double quantum_rate_narrow(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                           const SourceRates& rates);

/// Rate of the two side classes (S,L) + (L,S), including their mutual
/// interference residual; phase independent once dL >> l_coh.
double quantum_side_rate(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                         const SourceRates& rates);

/// Coincidence rate with every term coherent (window wider than dL/c).
/// At T = 1/2, mu = 1:
/// (rc0/2) int |Phi|^2 [1 - cos(k_p dL)/2 - cos((k_p - 2k1) dL)/2] dk1.
double quantum_rate_wide(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                         const SourceRates& rates);

/// Phase-and-spectrum averaged sampling probabilities per class, i.e. the
/// expectation of CoincidenceClassSet::sampling_probabilities() over |Phi|^2.
ClassProbabilities analytic_class_probabilities(const SpectralProfile& profile,
                                                const InterferometerGeometry& geometry);

/// Classical-field correlation <(1 + cos k1 dL)(1 - cos k2 dL)> in closed form,
/// with k1 ~ |Phi|^2 and k2 = k_p - k1. Tends to 1 - cos(k_p dL)/2 for dL >> l_coh.
double classical_correlation(const SpectralProfile& profile, const InterferometerGeometry& geometry);

/// Classical coincidence rate in the same units as quantum_rate_wide:
/// (rc0 / 2) * classical_correlation.
double classical_rate(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                      const SourceRates& rates);

struct Estimate {
  double mean;
  double std_error;
  std::uint64_t samples;
};

/// Sample mean of (1 + cos k1 dL)(1 - cos k2 dL) over sampled pairs.
Estimate classical_monte_carlo(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                               std::uint64_t n_samples, Rng& rng);

struct QuantumMonteCarlo {
  Estimate narrow;  // rate, s^-1
  Estimate wide;    // rate, s^-1
};

/// Averages the per-pair class probabilities over sampled pairs.
QuantumMonteCarlo quantum_monte_carlo(const SpectralProfile& profile,
                                      const InterferometerGeometry& geometry,
                                      const SourceRates& rates, std::uint64_t n_samples, Rng& rng);

// ---------------------------------------------------------------------------
// Event generation

enum class Detector : std::uint8_t { A, B };

enum class TruthClass : std::uint8_t {
  Central,       // (S,S) or (L,L)
  SidePlus,      // (S,L): B arrives dL/c after A
  SideMinus,     // (L,S): B arrives dL/c before A
  SameDetector,  // non-coincident pair, both photons at one detector
  Background,    // uncorrelated single
};

enum class PairOutcome : std::uint8_t { Central, SidePlus, SideMinus, NoCoincidence };

/// One detectable photon arrival (before detector efficiency, dead time and jitter).
struct PhotonArrival {
  double time;
  Detector detector;
  TruthClass truth;
};

/// One emitted pair. t_a / t_b are meaningful only for coincidence outcomes.
struct PairEvent {
  double emission_time;
  PairOutcome outcome;
  double t_a;
  double t_b;
};

struct OutcomeTally {
  std::uint64_t pairs = 0;  // pairs for which an outcome was drawn
  std::uint64_t central = 0;
  std::uint64_t side_plus = 0;
  std::uint64_t side_minus = 0;
  std::uint64_t no_coincidence = 0;

  OutcomeTally& operator+=(const OutcomeTally& other) noexcept;
};

struct EventStream {
  double duration = 0.0;
  std::vector<PhotonArrival> arrivals;  // sorted by time
  std::vector<PairEvent> pairs;         // only when requested; sorted by emission time
  OutcomeTally tally;
};

struct GenerationOptions {
  unsigned chunks = 1;      // independent substreams (seed, chunk)
  bool keep_pairs = false;  // record PairEvent for every drawn pair
};

/// Poisson pair emission at pair_rate over [0, duration). Every pair whose
/// photons are not both lost draws k1 from |Phi|^2 and an outcome from the
/// class probabilities; the remainder (probability 1 - P_coincidence) puts both
/// photons on one detector, A or B with equal probability. Independent
/// Poisson background arrives at singles_background on each detector.
///
/// Output depends only on (seed, options.chunks).
EventStream generate_events(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                            const SourceRates& rates, double duration, std::uint64_t seed,
                            const GenerationOptions& options = {});

const char* to_string(Detector d) noexcept;
const char* to_string(TruthClass c) noexcept;

/// CSV `time_s,detector,truth_class`. truth_class is for test introspection.
void write_events_csv(std::ostream& out, const EventStream& events);

}  // namespace twophoton
