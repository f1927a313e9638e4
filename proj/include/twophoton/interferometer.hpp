#pragma once

#include <array>
#include <complex>

#include "twophoton/spectral.hpp"

namespace twophoton {

enum class PathLabel { S, L };

/// Path difference kept as a coarse part plus a fine scan offset, so that
/// nanometre offsets on a half-metre arm imbalance keep full precision.
struct PathDifference {
  double coarse;  // path_long_base - path_short
  double fine;    // path_long_offset

  double total() const noexcept { return coarse + fine; }
};

/// Unbalanced Michelson interferometer.
///
/// Beam-splitter convention: one symmetric splitter U = [[t, r], [r, -t]] with
/// t = sqrt(T), r = sqrt(1 - T), traversed twice. A photon reaches
/// detector A via S with amplitude T, via L with 1 - T; detector B via S with
/// t*r and via L with -t*r. At T = 1/2 this is (1/2, 1/2, 1/2, -1/2).
///
/// `mode_overlap` (mu) scales every interference cross-term between
/// distinct amplitude terms.
class InterferometerGeometry {
 public:
  InterferometerGeometry(double path_short, double path_long_base, double path_long_offset = 0.0,
                         double splitter_transmittance = 0.5, double mode_overlap = 1.0);

  double path_short() const noexcept { return path_short_; }
  double path_long_base() const noexcept { return path_long_base_; }
  double path_long_offset() const noexcept { return path_long_offset_; }
  double path_long() const noexcept { return path_long_base_ + path_long_offset_; }
  double transmittance() const noexcept { return transmittance_; }
  double mode_overlap() const noexcept { return mode_overlap_; }

  PathDifference delta_L() const noexcept;

  /// k * delta_L wrapped into [-pi, pi], evaluated as
  /// remainder(k * coarse, 2 pi) + k * fine.
  double phase(double k) const noexcept;

  /// Arrival-time difference delta_L / c.
  double path_delay() const noexcept;

  /// True when path_long > path_short.
  bool is_valid() const noexcept;
  /// Throws DomainError when !is_valid().
  void validate() const;

  InterferometerGeometry with_offset(double offset) const;
  InterferometerGeometry with_mode_overlap(double mu) const;

 private:
  double path_short_;
  double path_long_base_;
  double path_long_offset_;
  double transmittance_;
  double mode_overlap_;
};

/// Scan offset in [0, 2 pi / k) that puts geometry.phase(k) at `target_phase`.
double offset_for_phase(const InterferometerGeometry& geometry, double k, double target_phase);

struct DetectorAmplitudes {
  std::complex<double> a_short;
  std::complex<double> a_long;
  std::complex<double> b_short;
  std::complex<double> b_long;

  double total_probability() const noexcept;
};

/// Single-photon amplitudes to reach each detector via each arm, including
/// the propagation phases exp(i k S) and exp(i k L).
DetectorAmplitudes detector_amplitudes(double k, const InterferometerGeometry& geometry);

/// One of the eight coincidence amplitudes of the post-selected two-photon
/// state. `ket` is 0 when photon k1 is at A (|k1>_A |k2>_B) and 1 for the
/// exchanged ket |k2>_A |k1>_B; terms in different kets are orthogonal.
struct CoincidenceTerm {
  PathLabel path_at_a;
  PathLabel path_at_b;
  double k_at_a;
  double k_at_b;
  std::complex<double> amplitude;
  int ket;
};

/// The eight terms, phases referenced to exp(i k_pump S) (a global phase
/// shared by every term since k1 + k2 = k_pump).
std::array<CoincidenceTerm, 8> coincidence_terms(const WavenumberPair& pair,
                                                 const InterferometerGeometry& geometry);

/// Norm of the coherent superposition of `terms`, with cross-terms inside
/// each ket scaled by mode_overlap.
double coherent_norm(const std::array<CoincidenceTerm, 8>& terms, double mode_overlap);

/// Detection-time offsets (from emission) for one arrival-time class.
struct TimeSignature {
  double t_a;
  double t_b;

  double stop_minus_start() const noexcept { return t_b - t_a; }
};

/// Per-class probabilities that the sampler draws from. The two side
/// classes share the S,L / L,S interference term in proportion to their
/// incoherent weights.
struct ClassProbabilities {
  double central;
  double side_plus;
  double side_minus;

  double total() const noexcept { return central + side_plus + side_minus; }
};

/// Coincidence terms grouped by arrival-time signature:
/// central = (S,S) + (L,L) with stop - start = 0; side_plus = (S,L) with
/// +delta_L/c; side_minus = (L,S) with -delta_L/c. Amplitudes are kept per ket.
struct CoincidenceClassSet {
  std::array<std::complex<double>, 2> ss;
  std::array<std::complex<double>, 2> ll;
  std::array<std::complex<double>, 2> sl;
  std::array<std::complex<double>, 2> ls;
  double mode_overlap;
  TimeSignature central_time;
  TimeSignature side_plus_time;
  TimeSignature side_minus_time;

  /// sum_ket |ss + ll|^2 with the cross-term scaled by mu.
  double central_probability() const noexcept;
  double sl_probability() const noexcept;
  double ls_probability() const noexcept;
  /// mu * sum_ket 2 Re(sl * conj(ls)); carries the cos((k1 - k2) delta_L) residual.
  double side_interference() const noexcept;
  /// Interference between the central and side classes: single-photon
  /// fringes, identically zero at T = 1/2.
  double central_side_interference() const noexcept;
  /// Full coincidence probability, every term coherent.
  double total_probability() const noexcept;

  ClassProbabilities sampling_probabilities() const noexcept;
};

CoincidenceClassSet coincidence_classes(const WavenumberPair& pair,
                                        const InterferometerGeometry& geometry);

const char* to_string(PathLabel path) noexcept;

}  // namespace twophoton
