#include "twophoton/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"
#include "twophoton/quadrature.hpp"

namespace twophoton {

namespace {

constexpr int kQuadraturePanels = 1000;  // 2001 grid points
constexpr double kGaussianSupport = 6.0;
constexpr double kNormalizationTolerance = 1e-9;
constexpr int kMaxSampleAttempts = 1'000'000;

}  // namespace

SpectralProfile::SpectralProfile(double k_pump, double delta_k, SpectralShape shape,
                                 std::optional<double> k_center)
    : k_pump_(k_pump),
      k_center_(k_center.value_or(0.5 * k_pump)),
      delta_k_(delta_k),
      shape_(shape) {
  if (!(k_pump_ > 0.0) || !std::isfinite(k_pump_)) {
    throw DomainError("spectral profile: k_pump must be positive");
  }
  if (!(delta_k_ > 0.0) || !std::isfinite(delta_k_)) {
    throw DomainError("spectral profile: delta_k must be positive");
  }
  if (!(k_center_ > 0.0 && k_center_ < k_pump_)) {
    throw DomainError("spectral profile: k_center must lie in (0, k_pump)");
  }
  const double norm = normalization();
  if (std::abs(norm - 1.0) > kNormalizationTolerance) {
    throw DomainError("spectral profile: density integrates to " + std::to_string(norm));
  }
}

SpectralProfile SpectralProfile::from_wavelength(double pump_wavelength, double coherence_length,
                                                 SpectralShape shape) {
  if (!(coherence_length > 0.0)) throw DomainError("coherence length must be positive");
  return SpectralProfile(wavelength_to_wavenumber(pump_wavelength), 1.0 / coherence_length, shape);
}

double SpectralProfile::density_at_offset(double u) const noexcept {
  switch (shape_) {
    case SpectralShape::Gaussian: {
      const double x = u / delta_k_;
      return std::exp(-x * x) * std::numbers::inv_sqrtpi / delta_k_;
    }
    case SpectralShape::Rectangular:
      return std::abs(u) <= delta_k_ ? 0.5 / delta_k_ : 0.0;
  }
  return 0.0;
}

std::pair<double, double> SpectralProfile::support() const noexcept {
  const double half = shape_ == SpectralShape::Gaussian ? kGaussianSupport * delta_k_ : delta_k_;
  return {-half, half};
}

std::complex<double> SpectralProfile::characteristic(double omega) const noexcept {
  switch (shape_) {
    case SpectralShape::Gaussian: {
      const double x = omega * delta_k_;
      return {std::exp(-0.25 * x * x), 0.0};
    }
    case SpectralShape::Rectangular: {
      const double x = omega * delta_k_;
      return {x == 0.0 ? 1.0 : std::sin(x) / x, 0.0};
    }
  }
  return {0.0, 0.0};
}

std::complex<double> SpectralProfile::characteristic_quadrature(double omega) const {
  const auto [lo, hi] = support();
  return filon_simpson_checked([this](double u) { return density_at_offset(u); }, lo, hi, omega,
                               kQuadraturePanels);
}

double SpectralProfile::normalization() const {
  const auto [lo, hi] = support();
  return filon_simpson([this](double u) { return density_at_offset(u); }, lo, hi, 0.0,
                       kQuadraturePanels)
      .real();
}

WavenumberPair WavenumberPair::from_signal(double k1, double k_pump) noexcept {
  // Subtracting from the half of the pair that is >= k_pump / 2 is exact
  // (Sterbenz), so the sum reproduces k_pump bit for bit.
  if (k1 >= 0.5 * k_pump) return {k1, k_pump - k1};
  const double k2 = k_pump - k1;
  return {k_pump - k2, k2};
}

double coherence_length(double delta_k) {
  if (!(delta_k > 0.0)) throw DomainError("coherence_length: delta_k must be positive");
  return 1.0 / delta_k;
}

double coherence_length(const SpectralProfile& profile) {
  return coherence_length(profile.delta_k());
}

double wavelength_to_wavenumber(double wavelength) {
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
  return kTwoPi / wavelength;
}

double wavenumber_to_wavelength(double wavenumber) {
  if (!(wavenumber > 0.0)) throw DomainError("wavenumber must be positive");
  return kTwoPi / wavenumber;
}

double wavenumber_spread(double wavelength, double wavelength_spread) {
  if (!(wavelength > 0.0) || !(wavelength_spread > 0.0)) {
    throw DomainError("wavelength and spread must be positive");
  }
  return kTwoPi * wavelength_spread / (wavelength * wavelength);
}

WavenumberPair sample_pair(const SpectralProfile& profile, Rng& rng) {
  const double kp = profile.k_pump();
  const double kc = profile.k_center();
  const double dk = profile.delta_k();
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    double k1 = kc;
    if (profile.shape() == SpectralShape::Gaussian) {
      std::normal_distribution<double> offset(0.0, dk / std::numbers::sqrt2);
      k1 = kc + offset(rng);
    } else {
      std::uniform_real_distribution<double> offset(-dk, dk);
      k1 = kc + offset(rng);
    }
    if (k1 > 0.0 && k1 < kp) return WavenumberPair::from_signal(k1, kp);
  }
  throw InternalError("sample_pair: no admissible k1 after 10^6 attempts");
}

const char* to_string(SpectralShape shape) noexcept {
  return shape == SpectralShape::Gaussian ? "gaussian" : "rectangular";
}

SpectralShape spectral_shape_from_string(const std::string& name) {
  if (name == "gaussian" || name == "Gaussian") return SpectralShape::Gaussian;
  if (name == "rectangular" || name == "Rectangular") return SpectralShape::Rectangular;
  throw DomainError("unknown spectral shape '" + name + "'");
}

}  // namespace twophoton
