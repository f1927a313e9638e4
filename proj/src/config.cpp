#include "twophoton/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "twophoton/errors.hpp"
#include "twophoton/format.hpp"

namespace twophoton {

using nlohmann::json;

std::vector<double> ScanSpec::offsets() const {
  if (points < 1) throw ConfigError("scan.points must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = start + (stop - start) * i / points;
  return out;
}

namespace {

json detector_json(const DetectorModel& d) {
  return {{"jitter_s", d.timing_jitter_sigma}, {"dead_time_s", d.dead_time}, {"efficiency", d.efficiency}};
}

// Reads one JSON object, remembering which keys were consumed so that
// typos surface as errors instead of silently falling back to defaults.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_null() && !obj_.is_object()) throw ConfigError(where_ + ": expected a mapping");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (obj_.is_null() || !obj_.contains(key)) return;
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, std::optional<double>>) {
        if (v.is_null()) {
          out.reset();
        } else {
          if (!v.is_number()) throw ConfigError("");
          out = v.get<double>();
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0 || std::is_signed_v<T>) {
          out = v.get<T>();
        } else {
          throw ConfigError("");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError("");
        out.clear();
        for (const auto& x : v) {
          if (!x.is_number()) throw ConfigError("");
          out.push_back(x.get<double>());
        }
      }
    } catch (const ConfigError&) {
      throw ConfigError(where_ + "." + key + ": wrong type (" + v.dump() + ")");
    }
  }

  bool has(const char* key) const { return !obj_.is_null() && obj_.contains(key); }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json kNull;
    if (!has(key)) return ObjectReader(kNull, where_ + "." + key);
    return ObjectReader(obj_.at(key), where_ + "." + key);
  }

  void finish() const {
    if (!obj_.is_object()) return;
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

DetectorModel read_detector(ObjectReader r) {
  DetectorModel d;
  r.read("jitter_s", d.timing_jitter_sigma);
  r.read("dead_time_s", d.dead_time);
  r.read("efficiency", d.efficiency);
  r.finish();
  return d;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string text = node.Scalar();
      if (node.Tag() == "!") return text;  // quoted
      if (text == "null" || text == "~") return nullptr;
      if (text == "true" || text == "false") return text == "true";
      std::size_t used = 0;
      try {
        const long long i = std::stoll(text, &used);
        if (used == text.size()) return i;
      } catch (const std::exception&) {
      }
      try {
        const double d = std::stod(text, &used);
        if (used == text.size()) return d;
      } catch (const std::exception&) {
      }
      return text;
    }
  }
  return nullptr;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json delta_k = c.delta_k ? json(*c.delta_k) : json(nullptr);
  return {
      {"pump_wavelength_m", c.pump_wavelength},
      {"spectrum",
       {{"shape", to_string(c.shape)}, {"coherence_length_m", c.coherence_length}, {"delta_k_rad_per_m", delta_k}}},
      {"geometry",
       {{"path_short_m", c.path_short},
        {"path_long_base_m", c.path_long_base},
        {"path_long_offset_m", c.path_long_offset},
        {"transmittance", c.transmittance},
        {"mode_overlap", c.mode_overlap},
        {"scan", {{"start_m", c.scan.start}, {"stop_m", c.scan.stop}, {"points", c.scan.points}}}}},
      {"rates",
       {{"pair_rate_per_s", c.rates.pair_rate},
        {"rc0_per_s", c.rates.rc0},
        {"singles_background_per_s", c.rates.singles_background}}},
      {"detector_a", detector_json(c.detector_a)},
      {"detector_b", detector_json(c.detector_b)},
      {"tac",
       {{"electrical_delay_s", c.tac.electrical_delay}, {"range_s", c.tac.range}, {"channels", c.tac.n_channels}}},
      {"pzt",
       {{"nm_per_volt", c.pzt.nm_per_volt},
        {"nm_per_volt_sigma", c.pzt.nm_per_volt_sigma},
        {"interpretation", to_string(c.pzt.interpretation)}}},
      {"analysis",
       {{"window_width_s", c.window_width},
        {"windows_s", c.windows},
        {"fit_period", c.fit_period},
        {"compare_samples", c.compare_samples},
        {"compare_phases", c.compare_phases}}},
      {"duration_s", c.duration},
      {"seed", c.seed},
      {"chunks", c.chunks},
      {"threads", c.threads},
      {"output", {{"dir", c.output.dir}, {"events", c.output.events}}},
  };
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  ObjectReader root(doc, "config");
  root.read("pump_wavelength_m", c.pump_wavelength);
  {
    auto r = root.child("spectrum");
    std::string shape = to_string(c.shape);
    r.read("shape", shape);
    try {
      c.shape = spectral_shape_from_string(shape);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config.spectrum.shape: ") + e.what());
    }
    r.read("coherence_length_m", c.coherence_length);
    r.read("delta_k_rad_per_m", c.delta_k);
    r.finish();
  }
  {
    auto r = root.child("geometry");
    r.read("path_short_m", c.path_short);
    r.read("path_long_base_m", c.path_long_base);
    r.read("path_long_offset_m", c.path_long_offset);
    r.read("transmittance", c.transmittance);
    r.read("mode_overlap", c.mode_overlap);
    auto s = r.child("scan");
    s.read("start_m", c.scan.start);
    s.read("stop_m", c.scan.stop);
    s.read("points", c.scan.points);
    s.finish();
    r.finish();
  }
  {
    auto r = root.child("rates");
    r.read("pair_rate_per_s", c.rates.pair_rate);
    r.read("rc0_per_s", c.rates.rc0);
    if (r.has("singles_background_per_s") && r.has("observed_singles_per_s")) {
      throw ConfigError("config.rates: give singles_background_per_s or observed_singles_per_s, not both");
    }
    r.read("singles_background_per_s", c.rates.singles_background);
    std::optional<double> observed;
    r.read("observed_singles_per_s", observed);
    if (observed) {
      c.rates = SourceRates::from_observed_singles(c.rates.pair_rate, c.rates.rc0, *observed);
    }
    r.finish();
  }
  c.detector_a = read_detector(root.child("detector_a"));
  c.detector_b = read_detector(root.child("detector_b"));
  {
    auto r = root.child("tac");
    r.read("electrical_delay_s", c.tac.electrical_delay);
    r.read("range_s", c.tac.range);
    r.read("channels", c.tac.n_channels);
    r.finish();
  }
  {
    auto r = root.child("pzt");
    r.read("nm_per_volt", c.pzt.nm_per_volt);
    r.read("nm_per_volt_sigma", c.pzt.nm_per_volt_sigma);
    std::string interp = to_string(c.pzt.interpretation);
    r.read("interpretation", interp);
    try {
      c.pzt.interpretation = pzt_interpretation_from_string(interp);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config.pzt.interpretation: ") + e.what());
    }
    r.finish();
  }
  {
    auto r = root.child("analysis");
    r.read("window_width_s", c.window_width);
    r.read("windows_s", c.windows);
    r.read("fit_period", c.fit_period);
    r.read("compare_samples", c.compare_samples);
    r.read("compare_phases", c.compare_phases);
    r.finish();
  }
  root.read("duration_s", c.duration);
  root.read("seed", c.seed);
  root.read("chunks", c.chunks);
  root.read("threads", c.threads);
  {
    auto r = root.child("output");
    r.read("dir", c.output.dir);
    r.read("events", c.output.events);
    r.finish();
  }
  root.finish();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text, bool is_json) {
  json doc;
  try {
    if (is_json) {
      doc = json::parse(text);
    } else {
      doc = yaml_to_json(YAML::Load(text));
    }
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  if (doc.is_null()) doc = json::object();
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.extension() == ".json");
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = to_json(config);
  doc.erase("output");
  doc.erase("threads");
  const std::string canonical = doc.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < 8 && i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::vector<std::string> config_warnings(const ExperimentConfig& c) {
  std::vector<std::string> out;
  const double l_coh = c.delta_k ? 1.0 / *c.delta_k : c.coherence_length;
  const double delta_l = c.path_long_base + c.path_long_offset - c.path_short;
  if (delta_l < 100.0 * l_coh) {
    out.push_back("delta_L = " + format_real(delta_l) + " m is below 100 coherence lengths (" +
                  format_real(100.0 * l_coh) + " m); single-photon interference is not negligible");
  }
  return out;
}

void print_default_config(std::ostream& out) {
  const ExperimentConfig d;
  const auto r = [](double v) { return format_real(v); };
  out << "# Defaults for every key. JSON with the same structure is also accepted.\n"
      << "pump_wavelength_m: " << r(d.pump_wavelength) << "   # 427 nm pump\n"
      << "spectrum:\n"
      << "  shape: gaussian            # gaussian | rectangular\n"
      << "  coherence_length_m: " << r(d.coherence_length) << "  # l_coh = 1 / delta_k\n"
      << "  delta_k_rad_per_m: null    # 1/e half-width of |Phi|^2; overrides coherence_length_m\n"
      << "geometry:\n"
      << "  path_short_m: " << r(d.path_short) << '\n'
      << "  path_long_base_m: " << r(d.path_long_base) << "     # delta_L = 0.55 m\n"
      << "  path_long_offset_m: " << r(d.path_long_offset) << "     # fine offset added to L\n"
      << "  transmittance: " << r(d.transmittance) << '\n'
      << "  mode_overlap: " << r(d.mode_overlap) << "          # mu, scales interference cross-terms\n"
      << "  scan:                      # offsets start + i (stop - start) / points\n"
      << "    start_m: " << r(d.scan.start) << '\n'
      << "    stop_m: " << r(d.scan.stop) << "  # two pump periods\n"
      << "    points: " << d.scan.points << '\n'
      << "rates:\n"
      << "  pair_rate_per_s: " << r(d.rates.pair_rate) << '\n'
      << "  rc0_per_s: " << r(d.rates.rc0) << "           # coincidence normalization\n"
      << "  singles_background_per_s: " << r(d.rates.singles_background)
      << "  # or observed_singles_per_s: total singles per detector\n"
      << "detector_a:\n"
      << "  jitter_s: " << r(d.detector_a.timing_jitter_sigma) << '\n'
      << "  dead_time_s: " << r(d.detector_a.dead_time) << '\n'
      << "  efficiency: " << r(d.detector_a.efficiency) << '\n'
      << "detector_b:\n"
      << "  jitter_s: " << r(d.detector_b.timing_jitter_sigma) << '\n'
      << "  dead_time_s: " << r(d.detector_b.dead_time) << '\n'
      << "  efficiency: " << r(d.detector_b.efficiency) << '\n'
      << "tac:\n"
      << "  electrical_delay_s: " << r(d.tac.electrical_delay) << "  # added to the stop channel\n"
      << "  range_s: " << r(d.tac.range) << '\n'
      << "  channels: " << d.tac.n_channels << '\n'
      << "pzt:\n"
      << "  nm_per_volt: " << r(d.pzt.nm_per_volt) << '\n'
      << "  nm_per_volt_sigma: " << r(d.pzt.nm_per_volt_sigma) << '\n'
      << "  interpretation: path_difference  # path_difference | mirror_displacement\n"
      << "analysis:\n"
      << "  window_width_s: " << r(d.window_width) << '\n'
      << "  windows_s: [" << r(d.windows[0]) << ", " << r(d.windows[1])
      << "]  # fringes: one corpus, gated per window\n"
      << "  fit_period: false          # false locks the period to the pump wavelength\n"
      << "  compare_samples: " << d.compare_samples << '\n'
      << "  compare_phases: " << d.compare_phases << '\n'
      << "duration_s: " << r(d.duration) << "                # per scan point\n"
      << "seed: " << d.seed << '\n'
      << "chunks: " << d.chunks << "                    # event-generation substreams\n"
      << "threads: " << d.threads << "                   # scan points in flight\n"
      << "output:\n"
      << "  dir: " << d.output.dir << '\n'
      << "  events: false              # histogram also writes events.csv\n";
}

}  // namespace twophoton
