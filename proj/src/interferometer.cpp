#include "twophoton/interferometer.hpp"

#include <cmath>
#include <string>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"

namespace twophoton {

namespace {

double wrap(double phase) noexcept { return std::remainder(phase, kTwoPi); }

// 2 pi - kTwoPi
constexpr double kTwoPiLow = 2.4492935982947064e-16;

// k * length reduced modulo 2 pi to about 1e-15 rad: the rounding error of the
// product is recovered with fma and the reduction uses 2 pi in two parts.
double product_mod_2pi(double k, double length) noexcept {
  const double p = k * length;
  const double err = std::fma(k, length, -p);
  const double n = std::nearbyint(p / kTwoPi);
  return (std::fma(-n, kTwoPi, p) - n * kTwoPiLow) + err;
}

struct ArmAmplitudes {
  std::complex<double> a_short, a_long, b_short, b_long;
};

// Amplitudes with the short-arm propagation phase factored out.
ArmAmplitudes relative_amplitudes(double k, const InterferometerGeometry& g) noexcept {
  const double t = g.transmittance();
  const double tr = std::sqrt(t * (1.0 - t));
  const auto delay = std::polar(1.0, g.phase(k));
  return {t, (1.0 - t) * delay, tr, -tr * delay};
}

std::complex<double> at_a(const ArmAmplitudes& amp, PathLabel p) noexcept {
  return p == PathLabel::S ? amp.a_short : amp.a_long;
}

std::complex<double> at_b(const ArmAmplitudes& amp, PathLabel p) noexcept {
  return p == PathLabel::S ? amp.b_short : amp.b_long;
}

double cross(std::complex<double> x, std::complex<double> y) noexcept {
  return 2.0 * (x * std::conj(y)).real();
}

}  // namespace

InterferometerGeometry::InterferometerGeometry(double path_short, double path_long_base,
                                               double path_long_offset,
                                               double splitter_transmittance, double mode_overlap)
    : path_short_(path_short),
      path_long_base_(path_long_base),
      path_long_offset_(path_long_offset),
      transmittance_(splitter_transmittance),
      mode_overlap_(mode_overlap) {
  if (!std::isfinite(path_short_) || !std::isfinite(path_long_base_) ||
      !std::isfinite(path_long_offset_)) {
    throw DomainError("interferometer: path lengths must be finite");
  }
  if (!(transmittance_ > 0.0 && transmittance_ < 1.0)) {
    throw DomainError("interferometer: splitter transmittance must lie in (0, 1)");
  }
  if (!(mode_overlap_ >= 0.0 && mode_overlap_ <= 1.0)) {
    throw DomainError("interferometer: mode overlap must lie in [0, 1]");
  }
}

PathDifference InterferometerGeometry::delta_L() const noexcept {
  return {path_long_base_ - path_short_, path_long_offset_};
}

double InterferometerGeometry::phase(double k) const noexcept {
  const auto d = delta_L();
  return wrap(product_mod_2pi(k, d.coarse) + product_mod_2pi(k, d.fine));
}

double InterferometerGeometry::path_delay() const noexcept {
  return delta_L().total() / kSpeedOfLight;
}

bool InterferometerGeometry::is_valid() const noexcept { return path_long() > path_short_; }

void InterferometerGeometry::validate() const {
  if (!is_valid()) {
    throw DomainError("interferometer: long arm must exceed short arm (delta_L = " +
                      std::to_string(delta_L().total()) + " m)");
  }
}

InterferometerGeometry InterferometerGeometry::with_offset(double offset) const {
  return {path_short_, path_long_base_, offset, transmittance_, mode_overlap_};
}

InterferometerGeometry InterferometerGeometry::with_mode_overlap(double mu) const {
  return {path_short_, path_long_base_, path_long_offset_, transmittance_, mu};
}

double offset_for_phase(const InterferometerGeometry& geometry, double k, double target_phase) {
  if (!(k > 0.0)) throw DomainError("offset_for_phase: k must be positive");
  const double needed = target_phase - product_mod_2pi(k, geometry.delta_L().coarse);
  double turns = std::fmod(needed, kTwoPi);
  if (turns < 0.0) turns += kTwoPi;
  return turns / k;
}

double DetectorAmplitudes::total_probability() const noexcept {
  return std::norm(a_short) + std::norm(a_long) + std::norm(b_short) + std::norm(b_long);
}

DetectorAmplitudes detector_amplitudes(double k, const InterferometerGeometry& geometry) {
  if (!(k > 0.0)) throw DomainError("detector_amplitudes: k must be positive");
  const auto rel = relative_amplitudes(k, geometry);
  const auto short_phase = std::polar(1.0, wrap(product_mod_2pi(k, geometry.path_short())));
  return {rel.a_short * short_phase, rel.a_long * short_phase, rel.b_short * short_phase,
          rel.b_long * short_phase};
}

std::array<CoincidenceTerm, 8> coincidence_terms(const WavenumberPair& pair,
                                                 const InterferometerGeometry& geometry) {
  const auto amp1 = relative_amplitudes(pair.k1, geometry);
  const auto amp2 = relative_amplitudes(pair.k2, geometry);
  std::array<CoincidenceTerm, 8> terms{};
  std::size_t n = 0;
  for (int ket = 0; ket < 2; ++ket) {
    const auto& on_a = ket == 0 ? amp1 : amp2;
    const auto& on_b = ket == 0 ? amp2 : amp1;
    const double k_a = ket == 0 ? pair.k1 : pair.k2;
    const double k_b = ket == 0 ? pair.k2 : pair.k1;
    for (PathLabel pa : {PathLabel::S, PathLabel::L}) {
      for (PathLabel pb : {PathLabel::S, PathLabel::L}) {
        terms[n++] = {pa, pb, k_a, k_b, at_a(on_a, pa) * at_b(on_b, pb), ket};
      }
    }
  }
  return terms;
}

double coherent_norm(const std::array<CoincidenceTerm, 8>& terms, double mode_overlap) {
  double norm = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    norm += std::norm(terms[i].amplitude);
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (terms[i].ket == terms[j].ket) {
        norm += mode_overlap * cross(terms[i].amplitude, terms[j].amplitude);
      }
    }
  }
  return norm;
}

double CoincidenceClassSet::central_probability() const noexcept {
  double p = 0.0;
  for (int k = 0; k < 2; ++k) p += std::norm(ss[k]) + std::norm(ll[k]) + mode_overlap * cross(ss[k], ll[k]);
  return p;
}

double CoincidenceClassSet::sl_probability() const noexcept { return std::norm(sl[0]) + std::norm(sl[1]); }

double CoincidenceClassSet::ls_probability() const noexcept { return std::norm(ls[0]) + std::norm(ls[1]); }

double CoincidenceClassSet::side_interference() const noexcept {
  return mode_overlap * (cross(sl[0], ls[0]) + cross(sl[1], ls[1]));
}

double CoincidenceClassSet::central_side_interference() const noexcept {
  double p = 0.0;
  for (int k = 0; k < 2; ++k) p += cross(ss[k] + ll[k], sl[k] + ls[k]);
  return mode_overlap * p;
}

double CoincidenceClassSet::total_probability() const noexcept {
  return central_probability() + sl_probability() + ls_probability() + side_interference() +
         central_side_interference();
}

ClassProbabilities CoincidenceClassSet::sampling_probabilities() const noexcept {
  const double plus = sl_probability();
  const double minus = ls_probability();
  const double side = plus + minus + side_interference();
  const double share = plus / (plus + minus);
  return {central_probability(), side * share, side * (1.0 - share)};
}

CoincidenceClassSet coincidence_classes(const WavenumberPair& pair,
                                        const InterferometerGeometry& geometry) {
  const auto terms = coincidence_terms(pair, geometry);
  CoincidenceClassSet set{};
  for (const auto& term : terms) {
    const bool a_short = term.path_at_a == PathLabel::S;
    const bool b_short = term.path_at_b == PathLabel::S;
    auto& slot = a_short ? (b_short ? set.ss : set.sl) : (b_short ? set.ls : set.ll);
    slot[term.ket] = term.amplitude;
  }
  set.mode_overlap = geometry.mode_overlap();
  const double t_short = geometry.path_short() / kSpeedOfLight;
  const double t_long = t_short + geometry.path_delay();
  set.central_time = {t_short, t_short};
  set.side_plus_time = {t_short, t_long};
  set.side_minus_time = {t_long, t_short};
  return set;
}

const char* to_string(PathLabel path) noexcept { return path == PathLabel::S ? "S" : "L"; }

}  // namespace twophoton
