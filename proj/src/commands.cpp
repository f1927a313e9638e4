#include "twophoton/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twophoton/constants.hpp"
#include "twophoton/errors.hpp"
#include "twophoton/format.hpp"

namespace twophoton {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string window_label(double window) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gns", window * 1e9);
  return buf;
}

void write_file(const fs::path& path, const std::string& hash, bool force, const std::string& body) {
  guard_output(path, hash, force);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

std::string existing_hash(const fs::path& path) {
  std::ifstream in(path);
  if (path.extension() == ".json") {
    try {
      const auto doc = json::parse(in);
      if (doc.contains("config_hash") && doc["config_hash"].is_string()) return doc["config_hash"];
    } catch (const std::exception&) {
    }
    return {};
  }
  std::string line;
  std::getline(in, line);
  const auto pos = line.find("config_hash=");
  if (pos == std::string::npos) return {};
  const auto start = pos + std::string("config_hash=").size();
  const auto end = line.find(',', start);
  return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

void log_warnings(const ExperimentConfig& config, const RunOptions& options) {
  if (options.log == nullptr) return;
  for (const auto& w : config_warnings(config)) *options.log << "warning: " << w << '\n';
}

}  // namespace

PipelineConfig build_pipeline(const ExperimentConfig& c) {
  try {
    const double k_pump = wavelength_to_wavenumber(c.pump_wavelength);
    const double delta_k = c.delta_k ? *c.delta_k : 1.0 / c.coherence_length;
    PipelineConfig p{SpectralProfile(k_pump, delta_k, c.shape),
                     InterferometerGeometry(c.path_short, c.path_long_base, c.path_long_offset,
                                            c.transmittance, c.mode_overlap),
                     c.rates,
                     c.detector_a,
                     c.detector_b,
                     c.tac,
                     c.pzt,
                     c.chunks,
                     c.threads};
    p.geometry.validate();
    p.rates.validate();
    p.detector_a.validate();
    p.detector_b.validate();
    p.tac.validate_for(p.geometry.path_delay());
    if (!(c.duration >= 0.0)) throw ConfigError("duration must be nonnegative");
    if (c.chunks < 1) throw ConfigError("chunks must be >= 1");
    if (!(c.pzt.nm_per_volt > 0.0)) throw ConfigError("pzt.nm_per_volt must be positive");
    return p;
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

void guard_output(const fs::path& path, const std::string& hash, bool force) {
  if (force || !fs::exists(path)) return;
  const auto previous = existing_hash(path);
  if (previous != hash) {
    throw ConfigError("refusing to overwrite " + path.string() + " written with config hash '" +
                      previous + "' (current " + hash + "); pass --force");
  }
}

HistogramRun cmd_histogram(const ExperimentConfig& config, const RunOptions& options) {
  const auto pipeline = build_pipeline(config);
  log_warnings(config, options);
  const std::string hash = config_hash(config);

  const auto events = generate_events(pipeline.profile, pipeline.geometry, pipeline.rates,
                                      config.duration, derive_rng(config.seed, 0, 1)(),
                                      {config.chunks, false});
  auto rng = derive_rng(config.seed, 0, 2);
  auto hist = acquire_histogram(events, pipeline.detector_a, pipeline.detector_b, pipeline.tac, rng);

  const double dt = pipeline.geometry.path_delay();
  const double sigma = std::hypot(pipeline.detector_a.timing_jitter_sigma,
                                  pipeline.detector_b.timing_jitter_sigma);
  const double delay = pipeline.tac.electrical_delay;
  const std::array<double, 3> guesses{delay - dt, delay, delay + dt};
  std::optional<PeakFit> peaks;
  try {
    peaks = fit_peaks(hist, guesses, sigma, sigma >= 2.0 * hist.bin_width() ? 4.0 * sigma : 0.45 * dt);
  } catch (const FitError& e) {
    if (options.log != nullptr) *options.log << "peaks not resolved: " << e.what() << '\n';
  }
  if (peaks && std::ranges::any_of(peaks->peaks, [&](const PeakCentroid& p) { return !(p.std_error < 0.5 * dt); })) {
    if (options.log != nullptr) *options.log << "peaks not resolved: too few counts\n";
    peaks.reset();
  }

  std::ostringstream body;
  write_histogram_csv(body, hist, hash);
  const auto file = options.out_dir / "histogram.csv";
  write_file(file, hash, options.force, body.str());

  if (config.output.events) {
    std::ostringstream ev;
    ev << "# config_hash=" << hash << '\n';
    write_events_csv(ev, events);
    write_file(options.out_dir / "events.csv", hash, options.force, ev.str());
  }
  if (options.log != nullptr) {
    *options.log << "histogram: " << hist.total() << " start-stop pairs, singles A " << hist.singles_a
                 << ", B " << hist.singles_b << '\n';
    if (peaks) {
      for (const auto& p : peaks->peaks) {
        *options.log << "  peak at " << format_real(p.position) << " +- " << format_real(p.std_error)
                     << " s (" << p.counts << " counts)\n";
      }
    }
  }
  return {std::move(hist), peaks, file};
}

json to_json(const VisibilityReport& r) {
  json j{{"visibility", r.visibility},
         {"raw_visibility", r.raw_visibility},
         {"visibility_sigma", r.visibility_sigma},
         {"period_m", r.period},
         {"period_sigma_m", r.period_sigma},
         {"period_locked", r.period_locked},
         {"phase_rad", r.phase},
         {"baseline", r.baseline},
         {"chi2", r.chi2},
         {"dof", r.dof},
         {"verdict", to_string(r.verdict)}};
  j["regime"] = r.regime ? json(to_string(*r.regime)) : json(nullptr);
  return j;
}

std::vector<WindowRun> cmd_fringes(const ExperimentConfig& config, const RunOptions& options) {
  const auto pipeline = build_pipeline(config);
  log_warnings(config, options);
  const std::string hash = config_hash(config);
  const auto windows = options.windows.empty() ? config.windows : options.windows;
  if (windows.empty()) throw ConfigError("no coincidence windows given");

  const auto offsets = config.scan.offsets();
  const auto records = acquire_scan(pipeline, offsets, config.duration, config.seed);
  const double period = wavenumber_to_wavelength(pipeline.profile.k_pump());

  std::vector<WindowRun> runs;
  for (const double window : windows) {
    if (!(window > 0.0)) throw ConfigError("coincidence window must be positive");
    WindowRun run{window, {}, {}, {}, {}};
    try {
      run.scan = gate_scan(records, pipeline.tac.electrical_delay, window, pipeline.geometry.path_delay());
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    run.report = fit_visibility(run.scan, config.fit_period ? std::nullopt : std::optional(period));

    const std::string label = window_label(window);
    std::ostringstream scan_body;
    write_scan_csv(scan_body, run.scan, hash);
    run.scan_file = options.out_dir / ("fringes_" + label + ".csv");
    write_file(run.scan_file, hash, options.force, scan_body.str());

    json report = to_json(run.report);
    report["window_width_s"] = window;
    report["config_hash"] = hash;
    run.report_file = options.out_dir / ("report_" + label + ".json");
    write_file(run.report_file, hash, options.force, report.dump(2) + "\n");

    if (options.log != nullptr) {
      *options.log << "window " << label << ": V = " << run.report.visibility << " +- "
                   << run.report.visibility_sigma << " ("
                   << (run.report.regime ? to_string(*run.report.regime) : "-") << " regime, "
                   << to_string(run.report.verdict) << ")\n";
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

json cmd_compare(const ExperimentConfig& config, const RunOptions& options) {
  const auto pipeline = build_pipeline(config);
  log_warnings(config, options);
  if (config.compare_phases < 2) throw ConfigError("compare_phases must be >= 2");
  if (config.compare_samples < 1) throw ConfigError("compare_samples must be >= 1");
  const std::string hash = config_hash(config);
  const auto& profile = pipeline.profile;
  const auto& rates = pipeline.rates;
  const double half = 0.5 * rates.rc0;

  json rows = json::array();
  for (int j = 0; j < config.compare_phases; ++j) {
    const double phase = kTwoPi * j / config.compare_phases;
    const auto geometry = pipeline.geometry.with_offset(offset_for_phase(pipeline.geometry, profile.k_pump(), phase));
    auto rng = derive_rng(config.seed, static_cast<std::uint64_t>(j), 3);
    const auto classical_mc = classical_monte_carlo(profile, geometry, config.compare_samples, rng);
    const auto quantum_mc = quantum_monte_carlo(profile, geometry, rates, config.compare_samples, rng);
    rows.push_back({{"pump_phase_rad", phase},
                    {"offset_m", geometry.path_long_offset()},
                    {"quantum_narrow", quantum_rate_narrow(profile, geometry, rates)},
                    {"quantum_side", quantum_side_rate(profile, geometry, rates)},
                    {"quantum_wide", quantum_rate_wide(profile, geometry, rates)},
                    {"classical", classical_rate(profile, geometry, rates)},
                    {"classical_mc", half * classical_mc.mean},
                    {"classical_mc_stderr", half * classical_mc.std_error},
                    {"quantum_narrow_mc", quantum_mc.narrow.mean},
                    {"quantum_narrow_mc_stderr", quantum_mc.narrow.std_error},
                    {"quantum_wide_mc", quantum_mc.wide.mean},
                    {"quantum_wide_mc_stderr", quantum_mc.wide.std_error}});
  }
  json doc{{"config_hash", hash},
           {"rc0_per_s", rates.rc0},
           {"delta_L_m", pipeline.geometry.delta_L().total()},
           {"coherence_length_m", coherence_length(profile)},
           {"samples_per_phase", config.compare_samples},
           {"rows", rows}};
  write_file(options.out_dir / "compare.json", hash, options.force, doc.dump(2) + "\n");
  if (options.log != nullptr) *options.log << "compare: " << rows.size() << " phases\n";
  return doc;
}

}  // namespace twophoton
