#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "twophoton/commands.hpp"
#include "twophoton/config.hpp"
#include "twophoton/errors.hpp"

namespace py = pybind11;
namespace tp = twophoton;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-windowed two-photon interference simulator";

  py::register_exception<tp::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<tp::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<tp::FitError>(m, "FitError", PyExc_RuntimeError);

  py::enum_<tp::SpectralShape>(m, "SpectralShape")
      .value("Gaussian", tp::SpectralShape::Gaussian)
      .value("Rectangular", tp::SpectralShape::Rectangular);
  py::enum_<tp::Regime>(m, "Regime").value("Classical", tp::Regime::Classical).value("Quantum", tp::Regime::Quantum);
  py::enum_<tp::Verdict>(m, "Verdict")
      .value("ConsistentWithClassical", tp::Verdict::ConsistentWithClassical)
      .value("Nonclassical", tp::Verdict::Nonclassical);

  py::class_<tp::SpectralProfile>(m, "SpectralProfile")
      .def(py::init<double, double, tp::SpectralShape, std::optional<double>>(), py::arg("k_pump"),
           py::arg("delta_k"), py::arg("shape") = tp::SpectralShape::Gaussian, py::arg("k_center") = py::none())
      .def_static("from_wavelength", &tp::SpectralProfile::from_wavelength, py::arg("pump_wavelength"),
                  py::arg("coherence_length"), py::arg("shape") = tp::SpectralShape::Gaussian)
      .def_property_readonly("k_pump", &tp::SpectralProfile::k_pump)
      .def_property_readonly("k_center", &tp::SpectralProfile::k_center)
      .def_property_readonly("delta_k", &tp::SpectralProfile::delta_k)
      .def("density", &tp::SpectralProfile::density)
      .def("normalization", &tp::SpectralProfile::normalization);

  m.def("coherence_length", py::overload_cast<const tp::SpectralProfile&>(&tp::coherence_length));
  m.def("wavelength_to_wavenumber", &tp::wavelength_to_wavenumber);
  m.def("wavenumber_to_wavelength", &tp::wavenumber_to_wavelength);

  py::class_<tp::InterferometerGeometry>(m, "InterferometerGeometry")
      .def(py::init<double, double, double, double, double>(), py::arg("path_short"),
           py::arg("path_long_base"), py::arg("path_long_offset") = 0.0,
           py::arg("splitter_transmittance") = 0.5, py::arg("mode_overlap") = 1.0)
      .def_property_readonly("delta_L", [](const tp::InterferometerGeometry& g) { return g.delta_L().total(); })
      .def_property_readonly("path_delay", &tp::InterferometerGeometry::path_delay)
      .def_property_readonly("path_long_offset", &tp::InterferometerGeometry::path_long_offset)
      .def("phase", &tp::InterferometerGeometry::phase)
      .def("with_offset", &tp::InterferometerGeometry::with_offset);
  m.def("offset_for_phase", &tp::offset_for_phase);

  py::class_<tp::SourceRates>(m, "SourceRates")
      .def(py::init([](double pair_rate, double rc0, double background) {
             return tp::SourceRates{pair_rate, rc0, background};
           }),
           py::arg("pair_rate") = 1e5, py::arg("rc0") = 800.0,
           py::arg("singles_background") = tp::SourceRates{}.singles_background)
      .def_readwrite("pair_rate", &tp::SourceRates::pair_rate)
      .def_readwrite("rc0", &tp::SourceRates::rc0)
      .def_readwrite("singles_background", &tp::SourceRates::singles_background);

  m.def("quantum_rate_narrow", &tp::quantum_rate_narrow);
  m.def("quantum_rate_wide", &tp::quantum_rate_wide);
  m.def("quantum_side_rate", &tp::quantum_side_rate);
  m.def("classical_rate", &tp::classical_rate);
  m.def(
      "classical_monte_carlo",
      [](const tp::SpectralProfile& p, const tp::InterferometerGeometry& g, std::uint64_t n, std::uint64_t seed) {
        auto rng = tp::derive_rng(seed, 0);
        const auto e = tp::classical_monte_carlo(p, g, n, rng);
        return py::make_tuple(e.mean, e.std_error);
      },
      py::arg("profile"), py::arg("geometry"), py::arg("n_samples"), py::arg("seed") = 1);
  m.def("classify_regime", py::overload_cast<double, const tp::InterferometerGeometry&>(&tp::classify_regime));

  py::class_<tp::VisibilityReport>(m, "VisibilityReport")
      .def_readonly("visibility", &tp::VisibilityReport::visibility)
      .def_readonly("visibility_sigma", &tp::VisibilityReport::visibility_sigma)
      .def_readonly("period", &tp::VisibilityReport::period)
      .def_readonly("phase", &tp::VisibilityReport::phase)
      .def_readonly("baseline", &tp::VisibilityReport::baseline)
      .def_readonly("regime", &tp::VisibilityReport::regime)
      .def_readonly("verdict", &tp::VisibilityReport::verdict);

  m.def(
      "fit_visibility",
      [](const std::vector<double>& offsets, const std::vector<std::uint64_t>& counts,
         std::optional<double> known_period) {
        if (offsets.size() != counts.size()) throw tp::DomainError("offsets and counts differ in length");
        tp::FringeScan scan;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
          scan.points.push_back({offsets[i], 0.0, 0, 0, counts[i], 1.0, 0.0});
        }
        return tp::fit_visibility(scan, known_period);
      },
      py::arg("offsets"), py::arg("counts"), py::arg("known_period") = py::none());

  m.def("default_config_yaml", [] {
    std::ostringstream out;
    tp::print_default_config(out);
    return out.str();
  });
  m.def("config_hash", [](const std::string& text, bool json) {
    return tp::config_hash(tp::parse_config_text(text, json));
  }, py::arg("text"), py::arg("json") = false);

  const auto options = [](const std::filesystem::path& out, bool force, const std::vector<double>& windows) {
    tp::RunOptions o{out};
    o.force = force;
    o.windows = windows;
    return o;
  };
  m.def(
      "run_histogram",
      [options](const std::string& config_text, const std::filesystem::path& out, bool force) {
        const auto run = tp::cmd_histogram(tp::parse_config_text(config_text, false), options(out, force, {}));
        py::list peaks;
        if (run.peaks)
          for (const auto& p : run.peaks->peaks) peaks.append(py::make_tuple(p.position, p.std_error, p.counts));
        return py::make_tuple(run.file, peaks);
      },
      py::arg("config_text"), py::arg("out"), py::arg("force") = false);
  m.def(
      "run_fringes",
      [options](const std::string& config_text, const std::filesystem::path& out,
                const std::vector<double>& windows, bool force) {
        py::dict result;
        for (const auto& run : tp::cmd_fringes(tp::parse_config_text(config_text, false),
                                               options(out, force, windows))) {
          result[py::float_(run.window_width)] = run.report;
        }
        return result;
      },
      py::arg("config_text"), py::arg("out"), py::arg("windows") = std::vector<double>{},
      py::arg("force") = false);
  m.def(
      "run_compare",
      [options](const std::string& config_text, const std::filesystem::path& out, bool force) {
        return tp::cmd_compare(tp::parse_config_text(config_text, false), options(out, force, {})).dump();
      },
      py::arg("config_text"), py::arg("out"), py::arg("force") = false);
}
