#include <doctest.h>

#include <cmath>
#include <numbers>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"
#include "twophoton/interferometer.hpp"

using namespace twophoton;

namespace {
constexpr double kPump427 = 14714719.688945167;
constexpr double kPi = std::numbers::pi;

InterferometerGeometry paper_geometry(double T = 0.5, double mu = 1.0) {
  return InterferometerGeometry(0.50, 1.05, 0.0, T, mu);
}

double wrap(double x) { return std::remainder(x, kTwoPi); }
}  // namespace

TEST_CASE("delta_L keeps the fine offset exact") {
  const auto g = paper_geometry();
  CHECK(g.delta_L().total() == doctest::Approx(0.55).epsilon(1e-15));
  const auto shifted = g.with_offset(100e-9);
  CHECK(shifted.delta_L().fine == 1e-7);
  CHECK(shifted.delta_L().coarse == g.delta_L().coarse);
  CHECK(shifted.delta_L().total() == doctest::Approx(0.5500001).epsilon(1e-15));

  const InterferometerGeometry flat(0.5, 0.5);
  CHECK(flat.delta_L().total() == 0.0);
  CHECK_FALSE(flat.is_valid());
  CHECK_THROWS_AS(flat.validate(), DomainError);
  CHECK(g.is_valid());
}

TEST_CASE("geometry parameter checks") {
  CHECK_THROWS_AS(InterferometerGeometry(0.5, 1.05, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(InterferometerGeometry(0.5, 1.05, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(InterferometerGeometry(0.5, 1.05, 0.0, 0.5, -0.1), DomainError);
  CHECK_THROWS_AS(InterferometerGeometry(0.5, 1.05, 0.0, 0.5, 1.1), DomainError);
  CHECK(paper_geometry().path_delay() == doctest::Approx(1.8346025235898364e-9).epsilon(1e-15));
}

TEST_CASE("phase of the split path difference") {
  const auto g = paper_geometry();
  // A scan step of one pump wavelength advances the phase by exactly 2 pi.
  const double step = 427e-9;
  const double p0 = g.phase(kPump427);
  const double p1 = g.with_offset(step).phase(kPump427);
  CHECK(std::abs(wrap(p1 - p0)) < 1e-8);
  const double quarter = g.with_offset(step / 4).phase(kPump427);
  CHECK(wrap(quarter - p0) == doctest::Approx(kPi / 2).epsilon(1e-8));
  for (double target : {0.0, kPi / 2, kPi, -kPi / 3, 2.5}) {
    const double off = offset_for_phase(g, kPump427, target);
    CHECK(off >= 0.0);
    CHECK(off < step * (1 + 1e-12));
    CHECK(std::abs(wrap(g.with_offset(off).phase(kPump427) - target)) < 1e-9);
  }
}

TEST_CASE("detector amplitudes") {
  const auto g = paper_geometry();
  SUBCASE("T = 1/2 magnitudes and sign pattern") {
    const double k = 7.3e6;
    const auto a = detector_amplitudes(k, g);
    for (auto z : {a.a_short, a.a_long, a.b_short, a.b_long}) CHECK(std::abs(z) == doctest::Approx(0.5));
    // Strip the propagation phases: what remains is (1/2, 1/2, 1/2, -1/2).
    // Reference phases in extended precision.
    const long double ks = static_cast<long double>(k) * g.path_short();
    const long double kl = ks + static_cast<long double>(k) * g.delta_L().coarse;
    const std::complex<double> es(double(std::cos(ks)), double(std::sin(ks)));
    const std::complex<double> el(double(std::cos(kl)), double(std::sin(kl)));
    CHECK(std::abs(a.a_short / es - 0.5) < 1e-12);
    CHECK(std::abs(a.a_long / el - 0.5) < 1e-12);
    CHECK(std::abs(a.b_short / es - 0.5) < 1e-12);
    CHECK(std::abs(a.b_long / el + 0.5) < 1e-12);
  }
  SUBCASE("unitarity for random T and k") {
    Rng rng(2);
    std::uniform_real_distribution<double> ut(1e-3, 1 - 1e-3), uk(1e6, 2e7);
    for (int i = 0; i < 1000; ++i) {
      const auto gi = paper_geometry(ut(rng));
      CHECK(std::abs(detector_amplitudes(uk(rng), gi).total_probability() - 1.0) < 1e-12);
    }
  }
  SUBCASE("equal arms modulo a wavelength") {
    // k dL = 2 pi n: choose k from the integer nearest to dL / lambda.
    const double dl = 0.55;
    const double n = std::round(dl / 854e-9);
    const double k = kTwoPi * n / dl;
    const auto a = detector_amplitudes(k, g);
    CHECK(std::abs(a.a_short - a.a_long) < 1e-8);
  }
}

TEST_CASE("eight coincidence terms") {
  const auto g = paper_geometry();
  const auto pair = WavenumberPair::from_signal(7.357e6 + 1234.5, kPump427);
  const auto terms = coincidence_terms(pair, g);
  for (const auto& t : terms) CHECK(std::abs(t.amplitude) == doctest::Approx(0.25).epsilon(1e-14));
  int ket0 = 0;
  for (const auto& t : terms) ket0 += t.ket == 0;
  CHECK(ket0 == 4);

  Rng rng(4);
  std::uniform_real_distribution<double> uk(-5e4, 5e4), off(0.0, 1e-6), mu(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto gi = g.with_offset(off(rng));
    const auto p = WavenumberPair::from_signal(kPump427 / 2 + uk(rng), kPump427);
    const double bracket = 1.0 - 0.5 * std::cos(gi.phase(kPump427)) -
                           0.5 * std::cos(wrap(gi.phase(p.k2) - gi.phase(p.k1)));
    // Full norm equals the bracket up to the global factor 1/2.
    CHECK(std::abs(coherent_norm(coincidence_terms(p, gi), 1.0) - 0.5 * bracket) < 1e-12);
    CHECK(std::abs(coincidence_classes(p, gi).total_probability() - 0.5 * bracket) < 1e-12);
  }
}

TEST_CASE("coincidence classes") {
  const auto base = paper_geometry();
  SUBCASE("central null at the constructive pump phase") {
    const auto g = base.with_offset(offset_for_phase(base, kPump427, 0.0));
    const auto pair = WavenumberPair::from_signal(7.36e6, kPump427);
    const auto c = coincidence_classes(pair, g);
    CHECK(c.central_probability() < 1e-15);
    CHECK(c.sampling_probabilities().central < 1e-15);
  }
  SUBCASE("mu = 0 leaves incoherent central probability") {
    const auto g = paper_geometry(0.5, 0.0);
    Rng rng(9);
    std::uniform_real_distribution<double> off(0.0, 427e-9);
    for (int i = 0; i < 50; ++i) {
      const auto pair = WavenumberPair::from_signal(7.36e6, kPump427);
      const auto c = coincidence_classes(pair, g.with_offset(off(rng)));
      double incoherent = 0.0;
      for (int k = 0; k < 2; ++k) incoherent += std::norm(c.ss[k]) + std::norm(c.ll[k]);
      CHECK(c.central_probability() == doctest::Approx(incoherent).epsilon(1e-14));
      CHECK(c.central_probability() == doctest::Approx(0.25).epsilon(1e-14));
    }
  }
  SUBCASE("time signatures") {
    const auto c = coincidence_classes(WavenumberPair::from_signal(7.36e6, kPump427), base);
    const double dt = base.path_delay();
    CHECK(c.central_time.stop_minus_start() == 0.0);
    CHECK(c.side_plus_time.stop_minus_start() == doctest::Approx(dt).epsilon(1e-14));
    CHECK(c.side_minus_time.stop_minus_start() == doctest::Approx(-dt).epsilon(1e-14));
  }
  SUBCASE("exchange symmetry and probability ranges") {
    Rng rng(12);
    std::uniform_real_distribution<double> uk(-3e4, 3e4), off(0.0, 1e-6), ut(0.05, 0.95), um(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const auto g = paper_geometry(ut(rng), um(rng)).with_offset(off(rng));
      const auto p = WavenumberPair::from_signal(kPump427 / 2 + uk(rng), kPump427);
      const WavenumberPair swapped{p.k2, p.k1};
      const auto a = coincidence_classes(p, g);
      const auto b = coincidence_classes(swapped, g);
      CHECK(a.central_probability() == doctest::Approx(b.central_probability()).epsilon(1e-12));
      CHECK(a.sl_probability() == doctest::Approx(b.sl_probability()).epsilon(1e-12));
      CHECK(a.ls_probability() == doctest::Approx(b.ls_probability()).epsilon(1e-12));
      const auto s = a.sampling_probabilities();
      for (double q : {s.central, s.side_plus, s.side_minus, s.total()}) {
        CHECK(q >= -1e-15);
        CHECK(q <= 1.0);
      }
    }
  }
  SUBCASE("central : side = 1 : 1 averaged over a fringe period") {
    const auto pair = WavenumberPair::from_signal(kPump427 / 2 + 1500.0, kPump427);
    constexpr int n = 64;
    double central = 0.0, side = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto c = coincidence_classes(pair, base.with_offset(427e-9 * j / n));
      central += c.central_probability();
      side += c.sl_probability() + c.ls_probability();
    }
    CHECK(central / n == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(side / n == doctest::Approx(0.25).epsilon(1e-12));
  }
}
