#include "twophoton/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"
#include "twophoton/format.hpp"

namespace twophoton {

Regime classify_regime(double window_width, double path_delay) {
  if (!(path_delay > 0.0)) throw DomainError("classify_regime: delta_L must be positive");
  if (!(window_width > 0.0)) throw DomainError("classify_regime: window must be positive");
  if (window_width == path_delay) {
    throw DomainError("classify_regime: window equals delta_L / c; regime undefined");
  }
  return window_width > path_delay ? Regime::Classical : Regime::Quantum;
}

Regime classify_regime(double window_width, const InterferometerGeometry& geometry) {
  if (!(geometry.delta_L().total() > 0.0)) {
    throw DomainError("classify_regime: delta_L must be positive");
  }
  return classify_regime(window_width, geometry.path_delay());
}

double volts_to_offset(double volts, const PztCalibration& cal) {
  const double per_volt = cal.nm_per_volt * 1e-9;
  return cal.interpretation == PztInterpretation::MirrorDisplacement ? 2.0 * volts * per_volt
                                                                     : volts * per_volt;
}

double offset_to_volts(double offset, const PztCalibration& cal) {
  if (!(cal.nm_per_volt > 0.0)) throw DomainError("pzt calibration must be positive");
  return offset / volts_to_offset(1.0, cal);
}

void FringeScan::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].duration >= 0.0)) throw PreconditionError("fringe scan: negative duration");
    if (i >= 2) {
      const bool up = points[1].offset > points[0].offset;
      const bool step_up = points[i].offset > points[i - 1].offset;
      if (up != step_up || points[i].offset == points[i - 1].offset) {
        throw PreconditionError("fringe scan: offsets must be strictly monotonic");
      }
    } else if (i == 1 && points[1].offset == points[0].offset) {
      throw PreconditionError("fringe scan: offsets must be strictly monotonic");
    }
  }
}

namespace {

void check_scan_offsets(std::span<const double> offsets, double period) {
  if (offsets.size() < 8) throw ConfigError("fringe scan: need at least 8 points");
  const double span = std::abs(offsets.back() - offsets.front());
  const double spacing = span / static_cast<double>(offsets.size() - 1);
  if (span + spacing < period * (1.0 - 1e-9)) {
    throw ConfigError("fringe scan: offsets cover " + format_real(span + spacing) +
                      " m, less than one fringe period " + format_real(period) + " m");
  }
}

}  // namespace

std::vector<ScanRecord> acquire_scan(const PipelineConfig& config, std::span<const double> offsets,
                                     double duration, std::uint64_t seed) {
  check_scan_offsets(offsets, wavenumber_to_wavelength(config.profile.k_pump()));
  config.geometry.validate();
  config.tac.validate_for(config.geometry.path_delay());
  config.detector_a.validate();
  config.detector_b.validate();
  config.rates.validate();

  std::vector<std::optional<ScanRecord>> slots(offsets.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < offsets.size(); i = next++) {
      const auto geometry =
          config.geometry.with_offset(config.geometry.path_long_offset() + offsets[i]);
      const std::uint64_t event_seed = derive_rng(seed, i, 1)();
      auto rng = derive_rng(seed, i, 2);
      const auto events = generate_events(config.profile, geometry, config.rates, duration,
                                          event_seed, {config.chunks, false});
      slots[i] = ScanRecord{offsets[i], offset_to_volts(offsets[i], config.pzt),
                            acquire_histogram(events, config.detector_a, config.detector_b,
                                              config.tac, rng)};
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(config.threads, offsets.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ScanRecord> records;
  records.reserve(slots.size());
  for (auto& s : slots) records.push_back(std::move(*s));
  return records;
}

FringeScan gate_scan(std::span<const ScanRecord> records, double window_center, double window_width,
                     std::optional<double> path_delay) {
  FringeScan scan;
  scan.path_delay = path_delay;
  for (const auto& r : records) {
    scan.points.push_back({r.offset, r.volts, r.histogram.singles_a, r.histogram.singles_b,
                           gate_count(r.histogram, window_center, window_width),
                           r.histogram.duration(), window_width});
  }
  return scan;
}

FringeScan run_fringe_scan(const PipelineConfig& config, std::span<const double> offsets,
                           double window_width, double duration, std::uint64_t seed) {
  const auto records = acquire_scan(config, offsets, duration, seed);
  return gate_scan(records, config.tac.electrical_delay, window_width, config.geometry.path_delay());
}

FringeScan poisson_scan(std::span<const double> offsets,
                        const std::function<double(double)>& expected_counts, double duration,
                        double window_width, Rng& rng) {
  FringeScan scan;
  for (const double x : offsets) {
    const double mean = expected_counts(x);
    if (!(mean >= 0.0)) throw DomainError("poisson_scan: negative expected count");
    std::uint64_t n = 0;
    if (mean > 0.0) n = std::poisson_distribution<std::uint64_t>(mean)(rng);
    scan.points.push_back({x, 0.0, 0, 0, n, duration, window_width});
  }
  return scan;
}

double chi2_survival(double chi2, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi2_survival: dof must be positive");
  if (chi2 <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * chi2);
}

double flatness_p_value(std::span<const double> counts) {
  if (counts.size() < 2) throw DomainError("flatness_p_value: need at least two values");
  double mean = 0.0;
  for (const double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  if (!(mean > 0.0)) throw DomainError("flatness_p_value: mean count must be positive");
  double chi2 = 0.0;
  for (const double c : counts) chi2 += (c - mean) * (c - mean) / mean;
  return chi2_survival(chi2, static_cast<double>(counts.size() - 1));
}

void write_scan_csv(std::ostream& out, const FringeScan& scan, const std::string& config_hash) {
  const double window = scan.points.empty() ? 0.0 : scan.points.front().window_width;
  out << "# config_hash=" << config_hash << ",window_width_s=" << format_real(window) << '\n';
  out << "offset_m,volts,singles_a,singles_b,coincidences,duration_s\n";
  for (const auto& p : scan.points) {
    out << format_real(p.offset) << ',' << format_real(p.volts) << ',' << p.singles_a << ','
        << p.singles_b << ',' << p.coincidences << ',' << format_real(p.duration) << '\n';
  }
}

const char* to_string(Regime r) noexcept { return r == Regime::Classical ? "classical" : "quantum"; }

const char* to_string(Verdict v) noexcept {
  return v == Verdict::Nonclassical ? "nonclassical" : "consistent_with_classical";
}

const char* to_string(PztInterpretation p) noexcept {
  return p == PztInterpretation::PathDifference ? "path_difference" : "mirror_displacement";
}

PztInterpretation pzt_interpretation_from_string(const std::string& name) {
  if (name == "path_difference") return PztInterpretation::PathDifference;
  if (name == "mirror_displacement") return PztInterpretation::MirrorDisplacement;
  throw DomainError("unknown PZT interpretation '" + name + "'");
}

}  // namespace twophoton
