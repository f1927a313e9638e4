#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "twophoton/analysis.hpp"
#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"

using namespace twophoton;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPeriod = 427e-9;
const InterferometerGeometry kGeometry(0.50, 1.05);

std::vector<double> grid(int n, double span, double start = 0.0) {
  std::vector<double> x;
  for (int i = 0; i < n; ++i) x.push_back(start + span * i / n);
  return x;
}

FringeScan exact_scan(const std::vector<double>& offsets, const std::function<double(double)>& f) {
  FringeScan scan;
  for (double x : offsets) {
    scan.points.push_back({x, 0.0, 0, 0, static_cast<std::uint64_t>(std::llround(f(x))), 1.0, 1e-9});
  }
  return scan;
}

double fringe(double x, double baseline, double v, double phase = 0.0) {
  return baseline * (1.0 - v * std::cos(kTwoPi * x / kPeriod + phase));
}

const SpectralProfile& profile() {
  static const auto p = SpectralProfile::from_wavelength(427e-9, 100e-6);
  return p;
}
}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(5e-9, kGeometry) == Regime::Classical);
  CHECK(classify_regime(1e-9, kGeometry) == Regime::Quantum);
  CHECK_THROWS_AS(classify_regime(kGeometry.path_delay(), kGeometry), DomainError);
  CHECK_THROWS_AS(classify_regime(1e-9, InterferometerGeometry(0.5, 0.5)), DomainError);
  CHECK_THROWS_AS(classify_regime(0.0, kGeometry), DomainError);
}

TEST_CASE("PZT calibration") {
  PztCalibration cal;
  CHECK(volts_to_offset(1.0, cal) == doctest::Approx(46e-9).epsilon(1e-15));
  CHECK(volts_to_offset(0.0, cal) == 0.0);
  cal.interpretation = PztInterpretation::MirrorDisplacement;
  CHECK(volts_to_offset(1.0, cal) == doctest::Approx(92e-9).epsilon(1e-15));
  CHECK(offset_to_volts(92e-9, cal) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pzt_interpretation_from_string("path_difference") == PztInterpretation::PathDifference);
  CHECK(pzt_interpretation_from_string("mirror_displacement") == PztInterpretation::MirrorDisplacement);
  CHECK_THROWS(pzt_interpretation_from_string("voltage"));
}

TEST_CASE("fit: exact recovery") {
  // Sixty-degree steps keep 1000 (1 - cos) integral.
  const auto offsets = grid(18, 3 * kPeriod);
  const auto scan = exact_scan(offsets, [](double x) { return fringe(x, 1000.0, 1.0); });
  const auto r = fit_visibility(scan, kPeriod);
  CHECK(r.visibility == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.raw_visibility == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.baseline == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK(std::abs(std::remainder(r.phase, kTwoPi)) < 1e-6);
  CHECK(r.period_locked);
  CHECK(r.dof == 15);

  const auto half = exact_scan(offsets, [](double x) { return fringe(x, 2000.0, 0.5, 1.0); });
  const auto h = fit_visibility(half, std::nullopt);
  CHECK(h.visibility == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(h.period == doctest::Approx(kPeriod).epsilon(1e-3));
  CHECK_FALSE(h.period_locked);
}

TEST_CASE("fit: Poisson closed loop at mu = 0.8") {
  Rng rng(3);
  const auto offsets = grid(24, 2 * kPeriod);
  int inside = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto scan = poisson_scan(offsets, [](double x) { return fringe(x, 1000.0, 0.8, 0.4); }, 1.0, 1e-9, rng);
    const auto r = fit_visibility(scan, kPeriod);
    inside += std::abs(r.visibility - 0.8) < 3 * r.visibility_sigma;
    CHECK(r.verdict == Verdict::Nonclassical);
  }
  CHECK(inside >= 19);
}

TEST_CASE("fit: classical scans") {
  Rng rng(17);
  const auto offsets = grid(24, 2 * kPeriod);
  const SourceRates rates{1e5, 800.0, 0.0};
  // 1000 expected coincidences per point on average.
  const double duration = 1000.0 / (0.5 * rates.rc0);
  const auto expected = [&](double x) {
    return classical_rate(profile(), kGeometry.with_offset(x), rates) * duration;
  };
  int false_positives = 0;
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto scan = poisson_scan(offsets, expected, duration, 5e-9, rng);
    const auto r = fit_visibility(scan, kPeriod);
    false_positives += r.verdict == Verdict::Nonclassical;
    within += std::abs(r.visibility - 0.5) < 3 * r.visibility_sigma;
  }
  CHECK(false_positives <= 5);
  CHECK(within >= 95);
}

TEST_CASE("fit: period invariant under an offset shift") {
  Rng rng(8);
  const auto offsets = grid(24, 2 * kPeriod);
  const auto scan = poisson_scan(offsets, [](double x) { return fringe(x, 3000.0, 0.7); }, 1.0, 1e-9, rng);
  FringeScan shifted = scan;
  for (auto& p : shifted.points) p.offset += 123.4e-9;
  const auto a = fit_visibility(scan, std::nullopt);
  const auto b = fit_visibility(shifted, std::nullopt);
  CHECK(b.period == doctest::Approx(a.period).epsilon(1e-6));
  CHECK(b.visibility == doctest::Approx(a.visibility).epsilon(1e-6));
  CHECK(a.period == doctest::Approx(kPeriod).epsilon(0.02));
  CHECK(a.period_sigma > 0.0);
}

TEST_CASE("fit: visibility invariant under count scaling") {
  Rng rng(9);
  const auto offsets = grid(24, 2 * kPeriod);
  const auto scan = poisson_scan(offsets, [](double x) { return fringe(x, 500.0, 0.6); }, 1.0, 1e-9, rng);
  FringeScan scaled = scan;
  for (auto& p : scaled.points) {
    p.coincidences *= 4;
    p.duration *= 4;
  }
  const auto a = fit_visibility(scan, kPeriod);
  const auto b = fit_visibility(scaled, kPeriod);
  CHECK(b.visibility == doctest::Approx(a.visibility).epsilon(1e-9));
  CHECK(b.visibility_sigma == doctest::Approx(a.visibility_sigma / 2).epsilon(1e-6));
}

TEST_CASE("fit: failures") {
  const auto offsets = grid(12, 2 * kPeriod);
  CHECK_THROWS_AS(fit_visibility(exact_scan(offsets, [](double) { return 0.0; }), kPeriod), FitError);
  CHECK_THROWS_AS(fit_visibility(exact_scan(grid(3, kPeriod), [](double) { return 5.0; }), kPeriod), FitError);
  FringeScan bad = exact_scan(offsets, [](double) { return 5.0; });
  bad.points[3].offset = bad.points[2].offset;
  CHECK_THROWS_AS(fit_visibility(bad, kPeriod), PreconditionError);
  try {
    fit_visibility(exact_scan(offsets, [](double) { return 0.0; }), kPeriod);
  } catch (const FitError& e) {
    CHECK(std::string(e.what()).find("12 points") != std::string::npos);
  }
}

TEST_CASE("verdict follows V - 2 sigma > 0.5") {
  Rng rng(13);
  const auto offsets = grid(24, 2 * kPeriod);
  for (int trial = 0; trial < 30; ++trial) {
    const double v = 0.4 + 0.02 * trial;
    const auto r = fit_visibility(poisson_scan(offsets, [&](double x) { return fringe(x, 400.0, v); }, 1.0, 1e-9, rng), kPeriod);
    CHECK((r.verdict == Verdict::Nonclassical) == (r.visibility - 2 * r.visibility_sigma > 0.5));
  }
}

TEST_CASE("flatness test") {
  const std::vector<double> flat(20, 1000.0);
  CHECK(flatness_p_value(flat) == 1.0);
  std::vector<double> ramp;
  for (int i = 0; i < 20; ++i) ramp.push_back(1000.0 + 20.0 * i);
  CHECK(flatness_p_value(ramp) < 1e-6);
  CHECK(chi2_survival(3.0, 3.0) == doctest::Approx(0.3916251762710877).epsilon(1e-12));
}

TEST_CASE("pipeline scans") {
  PipelineConfig config{profile(), kGeometry, SourceRates{1e5, 800.0, 0.0},
                        DetectorModel{}, DetectorModel{}, TacConfig{}, PztCalibration{}};
  const auto offsets = grid(12, kPeriod);
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(acquire_scan(config, grid(6, kPeriod), 0.1, 1), ConfigError);
    CHECK_THROWS_AS(acquire_scan(config, grid(12, 0.5 * kPeriod), 0.1, 1), ConfigError);
  }
  SUBCASE("zero duration gives zero counts") {
    const auto scan = run_fringe_scan(config, offsets, 1e-9, 0.0, 1);
    for (const auto& p : scan.points) {
      CHECK(p.coincidences == 0);
      CHECK(p.singles_a == 0);
    }
  }
  SUBCASE("thread count does not change the corpus") {
    config.threads = 1;
    const auto a = run_fringe_scan(config, offsets, 5e-9, 0.2, 4);
    config.threads = 3;
    const auto b = run_fringe_scan(config, offsets, 5e-9, 0.2, 4);
    std::ostringstream sa, sb;
    write_scan_csv(sa, a, "h");
    write_scan_csv(sb, b, "h");
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().find("# config_hash=h,window_width_s=5e-09\n"
                        "offset_m,volts,singles_a,singles_b,coincidences,duration_s\n") == 0);
  }
  SUBCASE("narrow and wide windows from one corpus") {
    // 100 ps jitter keeps the side peaks well inside the 5 ns gate.
    config.detector_a.timing_jitter_sigma = config.detector_b.timing_jitter_sigma = 100e-12;
    const auto records = acquire_scan(config, grid(24, 2 * kPeriod), 2.0, 7);
    const double d = config.tac.electrical_delay;
    const auto narrow = fit_visibility(gate_scan(records, d, 1e-9, kGeometry.path_delay()), kPeriod);
    const auto wide = fit_visibility(gate_scan(records, d, 5e-9, kGeometry.path_delay()), kPeriod);
    CHECK(std::abs(narrow.visibility - 1.0) < 3 * narrow.visibility_sigma + 1e-9);
    CHECK(std::abs(wide.visibility - 0.5) < 3 * wide.visibility_sigma);
    CHECK(narrow.regime == Regime::Quantum);
    CHECK(wide.regime == Regime::Classical);
    const auto full = fit_visibility(gate_scan(records, 10e-9, 20e-9), kPeriod);
    CHECK(std::abs(full.visibility - wide.visibility) < 0.05);
  }
}
