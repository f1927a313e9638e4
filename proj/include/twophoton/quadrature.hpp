#pragma once

#include <cmath>
#include <complex>

#include "twophoton/errors.hpp"

namespace twophoton {

namespace detail {

/// Moments of e^{i omega t} against 1, t, t^2 on [-h, h].
struct FilonMoments {
  double m0;  // real
  double m1;  // purely imaginary part
  double m2;  // real
};

FilonMoments filon_moments(double omega, double h);

}  // namespace detail

/// Filon-Simpson rule for int_a^b f(x) exp(i omega x) dx over `panels`
/// Simpson panels. The integrand's smooth part is interpolated piecewise
/// quadratically and the oscillatory factor is integrated exactly, so the
/// rule stays accurate when omega*(b-a) is many thousands of radians.
/// With omega = 0 it is composite Simpson.
template <class F>
std::complex<double> filon_simpson(F&& f, double a, double b, double omega, int panels) {
  if (panels < 1) throw DomainError("filon_simpson: need at least one panel");
  const double h = (b - a) / (2.0 * panels);
  const auto mom = detail::filon_moments(omega, h);
  std::complex<double> sum{0.0, 0.0};
  double f_left = f(a);
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (2 * p + 1) * h;
    const double f_mid = f(mid);
    const double f_right = f(a + (2 * p + 2) * h);
    const double slope = (f_right - f_left) / (2.0 * h);
    const double curv = (f_left - 2.0 * f_mid + f_right) / (2.0 * h * h);
    const std::complex<double> local{f_mid * mom.m0 + curv * mom.m2, slope * mom.m1};
    sum += std::polar(1.0, omega * mid) * local;
    f_left = f_right;
  }
  return sum;
}

/// Filon-Simpson at `panels` and 2*`panels`; throws InternalError when the two
/// disagree by more than rel_tol (relative to max(1, |I|)). Returns the finer one.
template <class F>
std::complex<double> filon_simpson_checked(F&& f, double a, double b, double omega, int panels,
                                           double rel_tol = 1e-9) {
  const auto coarse = filon_simpson(f, a, b, omega, panels);
  const auto fine = filon_simpson(f, a, b, omega, 2 * panels);
  const double scale = std::max(1.0, std::abs(fine));
  if (std::abs(fine - coarse) > rel_tol * scale) {
    throw InternalError("quadrature did not converge: |I(2n) - I(n)| = " +
                        std::to_string(std::abs(fine - coarse)));
  }
  return fine;
}

}  // namespace twophoton
