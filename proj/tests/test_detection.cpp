#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "twophoton/detection.hpp"
#include "twophoton/errors.hpp"

using namespace twophoton;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPathDelay = 1.8346025235898364e-9;  // 0.55 m / c

const SpectralProfile& profile() {
  static const auto p = SpectralProfile::from_wavelength(427e-9, 100e-6);
  return p;
}

InterferometerGeometry at_phase(double phase) {
  const InterferometerGeometry g(0.50, 1.05);
  return g.with_offset(offset_for_phase(g, profile().k_pump(), phase));
}

const DetectorModel kIdeal{0.0, 0.0, 1.0};
const TacConfig kTac;
}  // namespace

TEST_CASE("three peaks at delay and delay +- dL/c") {
  SUBCASE("ideal detectors") {
    const auto events = generate_events(profile(), at_phase(kPi / 2), SourceRates{1e5, 2e3, 0.0}, 2.0, 5);
    Rng rng(1);
    const auto hist = acquire_histogram(events, kIdeal, kIdeal, kTac, rng);
    const double half_bin = 0.5 * hist.bin_width();
    for (double expected : {kTac.electrical_delay - kPathDelay, kTac.electrical_delay,
                            kTac.electrical_delay + kPathDelay}) {
      const auto peak = peak_centroid(hist, expected, 0.3e-9);
      CHECK(peak.counts > 100);
      CHECK(std::abs(peak.position - expected) <= half_bin * (1 + 1e-9));
    }
  }
  SUBCASE("default jitter: separation within 3 centroid errors") {
    const auto events = generate_events(profile(), at_phase(kPi / 2), SourceRates{1e5, 2e3, 1e3}, 10.0, 6);
    Rng rng(2);
    const DetectorModel det;
    const auto hist = acquire_histogram(events, det, det, kTac, rng);
    const double d = kTac.electrical_delay;
    const double sigma = std::hypot(det.timing_jitter_sigma, det.timing_jitter_sigma);
    const std::array<double, 3> guesses{d - kPathDelay, d, d + kPathDelay};
    const auto fit = fit_peaks(hist, guesses, sigma, 4 * sigma);
    const auto& lo = fit.peaks[0];
    const auto& mid = fit.peaks[1];
    const auto& hi = fit.peaks[2];
    CHECK(std::abs((hi.position - mid.position) - kPathDelay) <
          3 * std::hypot(hi.std_error, mid.std_error));
    CHECK(std::abs((mid.position - lo.position) - kPathDelay) <
          3 * std::hypot(lo.std_error, mid.std_error));
    CHECK(fit.width == doctest::Approx(sigma).epsilon(0.05));
    CHECK(std::abs(fit.chi2 / fit.dof - 1.0) < 0.2);
  }
}

TEST_CASE("central peak vanishes at the null") {
  const auto events = generate_events(profile(), at_phase(0.0), SourceRates{1e5, 2e3, 0.0}, 2.0, 8);
  Rng rng(3);
  const auto hist = acquire_histogram(events, kIdeal, kIdeal, kTac, rng);
  const double d = kTac.electrical_delay;
  CHECK(gate_count(hist, d, 1e-9) == 0);
  const double left = double(gate_count(hist, d - kPathDelay, 1e-9));
  const double right = double(gate_count(hist, d + kPathDelay, 1e-9));
  CHECK(left > 500);
  CHECK(std::abs(left - right) < 3 * std::sqrt(left + right));
}

TEST_CASE("empty stream gives an empty histogram") {
  const EventStream empty;
  Rng rng(1);
  const auto hist = acquire_histogram(empty, DetectorModel{}, DetectorModel{}, kTac, rng);
  CHECK(hist.total() == 0);
  CHECK(hist.n_channels() == 4096);
  CHECK(hist.singles_a == 0);
}

TEST_CASE("unsorted input is rejected") {
  const std::vector<PhotonArrival> arrivals{{2e-6, Detector::A, TruthClass::Background},
                                            {1e-6, Detector::B, TruthClass::Background}};
  Rng rng(1);
  CHECK_THROWS_AS(acquire_histogram(arrivals, 1.0, kIdeal, kIdeal, kTac, rng), PreconditionError);
}

TEST_CASE("gate_count") {
  const auto events = generate_events(profile(), at_phase(1.0), SourceRates{1e5, 2e3, 1e3}, 1.0, 12);
  Rng rng(4);
  const auto hist = acquire_histogram(events, DetectorModel{}, DetectorModel{}, kTac, rng);
  const double d = kTac.electrical_delay;
  const auto wide = gate_count(hist, d, 5e-9);
  const auto narrow = gate_count(hist, d, 1e-9);
  const auto central = peak_centroid(hist, d, 0.8e-9).counts;
  const auto sides = peak_centroid(hist, d - kPathDelay, 0.8e-9).counts +
                     peak_centroid(hist, d + kPathDelay, 0.8e-9).counts;
  CHECK(narrow <= central + 10);
  CHECK(narrow >= 0.8 * central);
  CHECK(wide >= central + 0.9 * sides);
  CHECK(gate_count(hist, 0.5 * hist.range(), hist.range()) == hist.total());

  std::uint64_t previous = 0;
  for (double w = 0.0; w <= 20e-9; w += 0.25e-9) {
    const auto c = gate_count(hist, d, std::min(w, 20e-9));
    CHECK(c >= previous);
    previous = c;
  }
  CHECK_THROWS_AS(gate_count(hist, 19e-9, 5e-9), DomainError);
  CHECK_THROWS_AS(gate_count(hist, 1e-9, 5e-9), DomainError);
}

TEST_CASE("zero jitter, no background: narrow gate counts the central class exactly") {
  // eta = 1 and a modest pair rate keep unrelated stops out of the converter.
  const auto events = generate_events(profile(), at_phase(2.2), SourceRates{2e3, 2e3, 0.0}, 1.0, 15);
  std::uint64_t central_truth = 0;
  for (const auto& a : events.arrivals) central_truth += a.truth == TruthClass::Central && a.detector == Detector::A;
  Rng rng(5);
  const auto hist = acquire_histogram(events, kIdeal, kIdeal, kTac, rng);
  CHECK(central_truth == events.tally.central);
  CHECK(central_truth > 100);
  CHECK(gate_count(hist, kTac.electrical_delay, 1e-9) == central_truth);
}

TEST_CASE("accidental floor") {
  const double rate = 1e5;
  const double duration = 10.0;
  const double width = 5e-9;
  const auto events = generate_events(profile(), at_phase(0.0), SourceRates{0.0, 0.0, rate}, duration, 21);
  Rng rng(6);
  const auto hist = acquire_histogram(events, kIdeal, kIdeal, kTac, rng);
  const double expected = rate * rate * width * duration;
  const double got = double(gate_count(hist, kTac.electrical_delay, width));
  CHECK(std::abs(got - expected) < 4 * std::sqrt(expected));
}

TEST_CASE("detector model") {
  std::vector<PhotonArrival> arrivals;
  for (int i = 0; i < 100000; ++i) arrivals.push_back({i * 1e-6, Detector::A, TruthClass::Background});
  Rng rng(7);
  SUBCASE("efficiency thinning") {
    const auto clicks = register_clicks(arrivals, Detector::A, DetectorModel{0.0, 0.0, 0.5}, rng);
    CHECK(std::abs(double(clicks.size()) - 5e4) < 4 * std::sqrt(2.5e4));
    CHECK(register_clicks(arrivals, Detector::B, kIdeal, rng).empty());
  }
  SUBCASE("dead time is non-paralyzable") {
    const auto clicks = register_clicks(arrivals, Detector::A, DetectorModel{0.0, 2.5e-6, 1.0}, rng);
    CHECK(clicks.size() == 33334);
  }
  SUBCASE("jittered clicks stay sorted") {
    const auto clicks = register_clicks(arrivals, Detector::A, DetectorModel{1e-6, 0.0, 1.0}, rng);
    CHECK(std::is_sorted(clicks.begin(), clicks.end()));
  }
  CHECK_THROWS_AS((DetectorModel{-1.0, 0.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((DetectorModel{0.0, 0.0, 1.5}.validate()), ConfigError);
}

TEST_CASE("TAC configuration") {
  CHECK_NOTHROW(kTac.validate_for(kPathDelay));
  CHECK_THROWS_AS((TacConfig{1e-9, 20e-9, 4096}.validate_for(kPathDelay)), ConfigError);
  CHECK_THROWS_AS((TacConfig{10e-9, 11e-9, 4096}.validate_for(kPathDelay)), ConfigError);
  CHECK_THROWS_AS((TacConfig{10e-9, 0.0, 4096}.validate()), ConfigError);
  CHECK_THROWS_AS((TacConfig{10e-9, 20e-9, 1}.validate()), ConfigError);
}

TEST_CASE("histogram merge") {
  TacHistogram a(20e-9, 64, 1.0, true), b(20e-9, 64, 2.0, true);
  a.record(1e-9);
  b.record(1e-9);
  b.record(15e-9);
  a.merge(b);
  CHECK(a.total() == 3);
  CHECK(a.duration() == 3.0);
  TacHistogram dead(20e-9, 64, 1.0, false);
  CHECK_THROWS_AS(a.merge(dead), PreconditionError);
  CHECK_THROWS_AS(dead.merge(a), PreconditionError);
  TacHistogram other_bins(20e-9, 32, 1.0, true);
  CHECK_THROWS_AS(a.merge(other_bins), PreconditionError);
}

TEST_CASE("histogram CSV") {
  TacHistogram h(20e-9, 4, 2.5, true);
  h.record(6e-9);
  std::ostringstream out;
  write_histogram_csv(out, h, "abc");
  CHECK(out.str() == "# duration_s=2.5,config_hash=abc\nbin_center_s,count\n"
                     "2.5e-09,0\n7.500000000000001e-09,1\n1.25e-08,0\n1.75e-08,0\n");
}

TEST_CASE("joint peak fit") {
  const double sigma = 0.45e-9;
  const std::array<double, 3> truth{8.2e-9, 10.0e-9, 11.8e-9};
  const std::array<int, 3> sizes{20000, 5000, 20000};
  TacHistogram h(20e-9, 1024, 1.0, true);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> flat(0.0, 20e-9);
  for (int i = 0; i < 40000; ++i) h.record(flat(rng));
  for (int j = 0; j < 3; ++j) {
    std::normal_distribution<double> g(truth[j], sigma);
    for (int i = 0; i < sizes[j]; ++i) h.record(g(rng));
  }
  const std::array<double, 3> guesses{8.0e-9, 10.1e-9, 12.0e-9};
  const auto fit = fit_peaks(h, guesses, 0.6e-9, 2e-9);
  REQUIRE(fit.peaks.size() == 3);
  for (int j = 0; j < 3; ++j) {
    const auto& p = fit.peaks[j];
    CHECK(p.std_error == doctest::Approx(sigma / std::sqrt(sizes[j])).epsilon(0.15));
    CHECK(std::abs(p.position - truth[j]) < 4 * p.std_error);
    CHECK(std::abs(static_cast<double>(p.counts) - sizes[j]) < 4 * std::sqrt(sizes[j] + 0.0) + 200);
  }
  CHECK(fit.width == doctest::Approx(sigma).epsilon(0.02));
  CHECK(fit.background == doctest::Approx(40000.0 / 1024).epsilon(0.05));
  CHECK(std::abs(fit.chi2 / fit.dof - 1.0) < 0.2);

  SUBCASE("narrow width falls back to centroids") {
    const auto fb = fit_peaks(h, guesses, 0.01e-9, 1e-9);
    CHECK(fb.peaks.size() == 3);
    CHECK(fb.dof == 0);
  }
  SUBCASE("bad window") { CHECK_THROWS_AS(fit_peaks(h, guesses, 0.6e-9, 0.0), DomainError); }
}
