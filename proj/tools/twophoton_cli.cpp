#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "twophoton/commands.hpp"
#include "twophoton/config.hpp"
#include "twophoton/errors.hpp"

namespace tp = twophoton;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<double> windows_ns;
  bool force = false;
};

void add_common(CLI::App* sub, CommonArgs& args, bool with_windows) {
  sub->add_option("-c,--config", args.config, "YAML or JSON config (defaults when omitted)");
  sub->add_option("--seed", args.seed, "override the config seed");
  sub->add_option("-o,--out", args.out, "output directory (default: config output.dir or $TWOPHOTON_OUT)");
  sub->add_flag("--force", args.force, "overwrite outputs written under a different config");
  if (with_windows) {
    sub->add_option("-w,--window", args.windows_ns, "coincidence window in ns (repeatable)");
  }
}

tp::ExperimentConfig resolve(const CommonArgs& args, tp::RunOptions& options) {
  tp::ExperimentConfig config = args.config.empty() ? tp::ExperimentConfig{} : tp::load_config(args.config);
  if (args.seed) config.seed = *args.seed;
  if (!args.out.empty()) {
    options.out_dir = args.out;
  } else if (const char* env = std::getenv("TWOPHOTON_OUT"); env != nullptr && *env != '\0') {
    options.out_dir = env;
  } else {
    options.out_dir = config.output.dir;
  }
  options.force = args.force;
  for (const double w : args.windows_ns) options.windows.push_back(w * 1e-9);
  options.log = &std::cerr;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-photon Franson interferometer simulator"};
  app.require_subcommand(1);

  CommonArgs hist_args, fringe_args, compare_args;
  auto* hist = app.add_subcommand("histogram", "simulate one TAC histogram");
  add_common(hist, hist_args, false);
  auto* fringes = app.add_subcommand("fringes", "scan the long arm and fit fringe visibility");
  add_common(fringes, fringe_args, true);
  auto* compare = app.add_subcommand("compare", "quantum vs classical rates across pump phase");
  add_common(compare, compare_args, false);
  auto* print = app.add_subcommand("print-config", "print the default config as YAML");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    tp::RunOptions options;
    if (*print) {
      tp::print_default_config(std::cout);
    } else if (*hist) {
      const auto config = resolve(hist_args, options);
      const auto run = tp::cmd_histogram(config, options);
      std::cout << run.file.string() << '\n';
    } else if (*fringes) {
      const auto config = resolve(fringe_args, options);
      for (const auto& run : tp::cmd_fringes(config, options)) {
        std::cout << run.scan_file.string() << '\n' << run.report_file.string() << '\n';
      }
    } else if (*compare) {
      const auto config = resolve(compare_args, options);
      tp::cmd_compare(config, options);
      std::cout << (options.out_dir / "compare.json").string() << '\n';
    }
  } catch (const tp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tp::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tp::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
