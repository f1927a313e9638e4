#include "twophoton/engines.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"
#include "twophoton/format.hpp"

namespace twophoton {

namespace {

// Splitter-dependent coefficients of the class probabilities. At T = 1/2:
// incoherent = fringe = 1/4, single_photon = 0.
struct SplitterCoefficients {
  double incoherent;     // sum of |term|^2 in the central class (equal to the side total)
  double fringe;         // magnitude of the two-photon cross-terms
  double single_photon;  // magnitude of the central-side cross-terms
  double side_plus_share;

  explicit SplitterCoefficients(double t) noexcept {
    const double r = 1.0 - t;
    incoherent = 2.0 * t * r * (t * t + r * r);
    fringe = 4.0 * t * t * r * r;
    single_photon = 2.0 * t * r * (2.0 * t - 1.0) * (2.0 * t - 1.0);
    side_plus_share = t * t / (t * t + r * r);
  }
};

SpectralAverages averages_from(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                               auto&& characteristic) {
  const double kp = profile.k_pump();
  const double kc = profile.k_center();
  const double dl = geometry.delta_L().total();
  const auto rotate = [](double phase, std::complex<double> z) {
    return (std::polar(1.0, phase) * z).real();
  };
  return {std::cos(geometry.phase(kp)),
          rotate(geometry.phase(kp - 2.0 * kc), characteristic(-2.0 * dl)),
          rotate(geometry.phase(kc), characteristic(dl)),
          rotate(geometry.phase(kp - kc), characteristic(-dl))};
}

class RunningMean {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  Estimate estimate() const noexcept {
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(std::max<std::uint64_t>(n_, 1))), n_};
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

SourceRates SourceRates::from_observed_singles(double pair_rate, double rc0, double observed_singles) {
  SourceRates rates{pair_rate, rc0, 0.0};
  const double from_pairs = pair_rate > 0.0 ? pair_rate * rates.collection_efficiency() : 0.0;
  rates.singles_background = std::max(0.0, observed_singles - from_pairs);
  return rates;
}

void SourceRates::validate() const {
  if (!(pair_rate >= 0.0) || !(rc0 >= 0.0) || !(singles_background >= 0.0)) {
    throw ConfigError("source rates must be nonnegative");
  }
  if (pair_rate > 0.0) collection_efficiency();
}

double SourceRates::collection_efficiency() const {
  if (pair_rate <= 0.0) return 0.0;
  const double eta = std::sqrt(rc0 / pair_rate);
  if (eta > 1.0) {
    throw ConfigError("rc0 = " + format_real(rc0) + " exceeds pair_rate = " + format_real(pair_rate) +
                      ": per-pair coincidence probability would exceed 1");
  }
  return eta;
}

SpectralAverages spectral_averages(const SpectralProfile& profile,
                                   const InterferometerGeometry& geometry) {
  return averages_from(profile, geometry,
                       [&](double omega) { return profile.characteristic_quadrature(omega); });
}

SpectralAverages spectral_averages_closed_form(const SpectralProfile& profile,
                                               const InterferometerGeometry& geometry) {
  return averages_from(profile, geometry, [&](double omega) { return profile.characteristic(omega); });
}

double quantum_rate_narrow(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                           const SourceRates& rates) {
  const SplitterCoefficients c(geometry.transmittance());
  const double pump_cos = std::cos(geometry.phase(profile.k_pump()));
  return rates.rc0 * (c.incoherent - geometry.mode_overlap() * c.fringe * pump_cos);
}

double quantum_side_rate(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                         const SourceRates& rates) {
  const SplitterCoefficients c(geometry.transmittance());
  const auto avg = spectral_averages(profile, geometry);
  const double mu = geometry.mode_overlap();
  return rates.rc0 * (c.incoherent - mu * c.fringe * avg.residual -
                      mu * c.single_photon * (avg.signal_cos + avg.idler_cos));
}

double quantum_rate_wide(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                         const SourceRates& rates) {
  return quantum_rate_narrow(profile, geometry, rates) + quantum_side_rate(profile, geometry, rates);
}

ClassProbabilities analytic_class_probabilities(const SpectralProfile& profile,
                                                const InterferometerGeometry& geometry) {
  const SplitterCoefficients c(geometry.transmittance());
  const auto avg = spectral_averages(profile, geometry);
  const double mu = geometry.mode_overlap();
  const double side = c.incoherent - mu * c.fringe * avg.residual;
  return {c.incoherent - mu * c.fringe * avg.pump_cos, side * c.side_plus_share,
          side * (1.0 - c.side_plus_share)};
}

double classical_correlation(const SpectralProfile& profile, const InterferometerGeometry& geometry) {
  // (1 + c1)(1 - c2) = 1 + c1 - c2 - [cos((k1 + k2) dL) + cos((k1 - k2) dL)] / 2
  const auto avg = spectral_averages_closed_form(profile, geometry);
  return 1.0 + avg.signal_cos - avg.idler_cos - 0.5 * avg.pump_cos - 0.5 * avg.residual;
}

double classical_rate(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                      const SourceRates& rates) {
  return 0.5 * rates.rc0 * classical_correlation(profile, geometry);
}

Estimate classical_monte_carlo(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                               std::uint64_t n_samples, Rng& rng) {
  if (n_samples < 1) throw DomainError("classical_monte_carlo: need at least one sample");
  RunningMean acc;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const auto pair = sample_pair(profile, rng);
    acc.add((1.0 + std::cos(geometry.phase(pair.k1))) * (1.0 - std::cos(geometry.phase(pair.k2))));
  }
  return acc.estimate();
}

QuantumMonteCarlo quantum_monte_carlo(const SpectralProfile& profile,
                                      const InterferometerGeometry& geometry,
                                      const SourceRates& rates, std::uint64_t n_samples, Rng& rng) {
  if (n_samples < 1) throw DomainError("quantum_monte_carlo: need at least one sample");
  RunningMean narrow;
  RunningMean wide;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const auto classes = coincidence_classes(sample_pair(profile, rng), geometry);
    narrow.add(rates.rc0 * classes.central_probability());
    wide.add(rates.rc0 * classes.total_probability());
  }
  return {narrow.estimate(), wide.estimate()};
}

// ---------------------------------------------------------------------------

OutcomeTally& OutcomeTally::operator+=(const OutcomeTally& other) noexcept {
  pairs += other.pairs;
  central += other.central;
  side_plus += other.side_plus;
  side_minus += other.side_minus;
  no_coincidence += other.no_coincidence;
  return *this;
}

namespace {

struct ChunkResult {
  std::vector<PhotonArrival> arrivals;
  std::vector<PairEvent> pairs;
  OutcomeTally tally;
};

void add_background(std::vector<PhotonArrival>& out, Detector detector, double rate, double t_begin,
                    double t_end, Rng& rng) {
  if (rate <= 0.0) return;
  std::exponential_distribution<double> gap(rate);
  for (double t = t_begin + gap(rng); t < t_end; t += gap(rng)) {
    out.push_back({t, detector, TruthClass::Background});
  }
}

ChunkResult generate_chunk(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                           const SourceRates& rates, double t_begin, double t_end, Rng rng,
                           bool keep_pairs) {
  ChunkResult out;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  if (rates.pair_rate > 0.0) {
    const double eta = rates.collection_efficiency();
    const double t_short = geometry.path_short() / kSpeedOfLight;
    const double t_long = t_short + geometry.path_delay();
    const double transmit = geometry.transmittance();
    std::exponential_distribution<double> gap(rates.pair_rate);

    for (double t0 = t_begin + gap(rng); t0 < t_end; t0 += gap(rng)) {
      const bool keep_first = uniform(rng) < eta;
      const bool keep_second = uniform(rng) < eta;
      if (!keep_first && !keep_second) continue;

      const auto classes = coincidence_classes(sample_pair(profile, rng), geometry);
      const auto p = classes.sampling_probabilities();
      const double u = uniform(rng);
      ++out.tally.pairs;

      PairOutcome outcome = PairOutcome::NoCoincidence;
      TimeSignature when{};
      TruthClass truth = TruthClass::SameDetector;
      if (u < p.central) {
        outcome = PairOutcome::Central;
        when = classes.central_time;
        truth = TruthClass::Central;
        ++out.tally.central;
      } else if (u < p.central + p.side_plus) {
        outcome = PairOutcome::SidePlus;
        when = classes.side_plus_time;
        truth = TruthClass::SidePlus;
        ++out.tally.side_plus;
      } else if (u < p.total()) {
        outcome = PairOutcome::SideMinus;
        when = classes.side_minus_time;
        truth = TruthClass::SideMinus;
        ++out.tally.side_minus;
      } else {
        ++out.tally.no_coincidence;
      }

      if (outcome == PairOutcome::NoCoincidence) {
        const Detector where = uniform(rng) < 0.5 ? Detector::A : Detector::B;
        const double first = uniform(rng) < transmit ? t_short : t_long;
        const double second = uniform(rng) < transmit ? t_short : t_long;
        if (keep_first) out.arrivals.push_back({t0 + first, where, truth});
        if (keep_second) out.arrivals.push_back({t0 + second, where, truth});
        if (keep_pairs) out.pairs.push_back({t0, outcome, 0.0, 0.0});
      } else {
        if (keep_first) out.arrivals.push_back({t0 + when.t_a, Detector::A, truth});
        if (keep_second) out.arrivals.push_back({t0 + when.t_b, Detector::B, truth});
        if (keep_pairs) out.pairs.push_back({t0, outcome, t0 + when.t_a, t0 + when.t_b});
      }
    }
  }

  add_background(out.arrivals, Detector::A, rates.singles_background, t_begin, t_end, rng);
  add_background(out.arrivals, Detector::B, rates.singles_background, t_begin, t_end, rng);
  return out;
}

bool arrival_before(const PhotonArrival& x, const PhotonArrival& y) noexcept {
  if (x.time != y.time) return x.time < y.time;
  if (x.detector != y.detector) return x.detector < y.detector;
  return x.truth < y.truth;
}

}  // namespace

EventStream generate_events(const SpectralProfile& profile, const InterferometerGeometry& geometry,
                            const SourceRates& rates, double duration, std::uint64_t seed,
                            const GenerationOptions& options) {
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw DomainError("generate_events: duration must be nonnegative");
  }
  if (options.chunks < 1) throw DomainError("generate_events: need at least one chunk");
  geometry.validate();
  rates.validate();

  EventStream stream;
  stream.duration = duration;
  if (duration == 0.0) return stream;

  const unsigned n = options.chunks;
  std::vector<std::future<ChunkResult>> jobs;
  jobs.reserve(n);
  for (unsigned c = 0; c < n; ++c) {
    const double t_begin = duration * c / n;
    const double t_end = c + 1 == n ? duration : duration * (c + 1) / n;
    jobs.push_back(std::async(n > 1 ? std::launch::async : std::launch::deferred, generate_chunk,
                              std::cref(profile), std::cref(geometry), std::cref(rates), t_begin,
                              t_end, derive_rng(seed, c), options.keep_pairs));
  }
  for (auto& job : jobs) {
    auto chunk = job.get();
    stream.arrivals.insert(stream.arrivals.end(), chunk.arrivals.begin(), chunk.arrivals.end());
    stream.pairs.insert(stream.pairs.end(), chunk.pairs.begin(), chunk.pairs.end());
    stream.tally += chunk.tally;
  }
  std::sort(stream.arrivals.begin(), stream.arrivals.end(), arrival_before);
  return stream;
}

const char* to_string(Detector d) noexcept { return d == Detector::A ? "A" : "B"; }

const char* to_string(TruthClass c) noexcept {
  switch (c) {
    case TruthClass::Central: return "central";
    case TruthClass::SidePlus: return "side_plus";
    case TruthClass::SideMinus: return "side_minus";
    case TruthClass::SameDetector: return "same_detector";
    case TruthClass::Background: return "background";
  }
  return "unknown";
}

void write_events_csv(std::ostream& out, const EventStream& events) {
  out << "time_s,detector,truth_class\n";
  for (const auto& a : events.arrivals) {
    out << format_real(a.time) << ',' << to_string(a.detector) << ',' << to_string(a.truth) << '\n';
  }
}

}  // namespace twophoton
