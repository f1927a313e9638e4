#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>

#include "twophoton/random.hpp"

namespace twophoton {

enum class SpectralShape { Gaussian, Rectangular };

/// Biphoton spectrum of degenerate, perfectly phase-matched down-conversion.
///
/// The signal wavenumber k1 is distributed with density |Phi(k1)|^2 and the
/// idler is fixed by k1 + k2 = k_pump. Wavenumbers are angular (k = 2 pi / lambda).
///
/// `delta_k` is the 1/e half-width of the density: the Gaussian density is
/// proportional to exp(-(k - k_center)^2 / delta_k^2); the rectangular density
/// is flat on [k_center - delta_k, k_center + delta_k].
///
/// Construction checks that the density integrates to one by quadrature
/// (to 1e-9), so every live profile is normalized.
class SpectralProfile {
 public:
  SpectralProfile(double k_pump, double delta_k, SpectralShape shape = SpectralShape::Gaussian,
                  std::optional<double> k_center = std::nullopt);

  /// Profile from pump wavelength and coherence length (delta_k = 1 / l_coh).
  static SpectralProfile from_wavelength(double pump_wavelength, double coherence_length,
                                         SpectralShape shape = SpectralShape::Gaussian);

  double k_pump() const noexcept { return k_pump_; }
  double k_center() const noexcept { return k_center_; }
  double delta_k() const noexcept { return delta_k_; }
  SpectralShape shape() const noexcept { return shape_; }

  /// |Phi(k_center + u)|^2
  double density_at_offset(double u) const noexcept;
  /// |Phi(k)|^2
  double density(double k) const noexcept { return density_at_offset(k - k_center_); }

  /// Integration range in u = k - k_center: +-6 delta_k (Gaussian) or the exact support.
  std::pair<double, double> support() const noexcept;

  /// int |Phi(k_center + u)|^2 exp(i omega u) du in closed form.
  std::complex<double> characteristic(double omega) const noexcept;
  /// Same integral by Filon-Simpson quadrature over support().
  std::complex<double> characteristic_quadrature(double omega) const;

  /// Numerical integral of the density over its support.
  double normalization() const;

 private:
  double k_pump_;
  double k_center_;
  double delta_k_;
  SpectralShape shape_;
};

/// Signal/idler wavenumbers; k2 is derived so that k1 + k2 == k_pump in
/// floating point.
struct WavenumberPair {
  double k1;
  double k2;

  static WavenumberPair from_signal(double k1, double k_pump) noexcept;
};

/// l_coh = 1 / delta_k. Throws DomainError for delta_k <= 0.
double coherence_length(double delta_k);
double coherence_length(const SpectralProfile& profile);

/// k = 2 pi / lambda and its inverse. Throw DomainError for nonpositive input.
double wavelength_to_wavenumber(double wavelength);
double wavenumber_to_wavelength(double wavenumber);

/// Angular-wavenumber spread 2 pi d_lambda / lambda^2 of a wavelength spread.
double wavenumber_spread(double wavelength, double wavelength_spread);

/// Draws k1 with density |Phi|^2, restricted to 0 < k1 < k_pump.
/// Throws InternalError if 10^6 draws all fall outside that interval.
WavenumberPair sample_pair(const SpectralProfile& profile, Rng& rng);

const char* to_string(SpectralShape shape) noexcept;
SpectralShape spectral_shape_from_string(const std::string& name);

}  // namespace twophoton
