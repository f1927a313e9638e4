#include "twophoton/quadrature.hpp"

namespace twophoton::detail {

FilonMoments filon_moments(double omega, double h) {
  const double theta = omega * h;
  const double t2 = theta * theta;
  if (std::abs(theta) < 1e-3) {
    // Series; next omitted terms are O(theta^6) relative.
    return {2.0 * h * (1.0 - t2 / 6.0 + t2 * t2 / 120.0),
            2.0 * h * h * theta * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0),
            2.0 * h * h * h * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0)};
  }
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return {2.0 * h * s / theta,
          2.0 * h * h * (s - theta * c) / t2,
          2.0 * h * h * h * (t2 * s + 2.0 * theta * c - 2.0 * s) / (t2 * theta)};
}

}  // namespace twophoton::detail
