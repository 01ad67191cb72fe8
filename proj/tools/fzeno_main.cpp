// fzeno command line: run, preset, validate.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "fzeno/config.hpp"
#include "fzeno/errors.hpp"
#include "fzeno/presets.hpp"
#include "fzeno/runner.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

int report_error(const fzeno::Error& e) {
  std::cerr << "fzeno: " << e.what() << "\n";
  return e.is_config_error() ? exit_config : exit_numeric;
}

void print_summary(const fzeno::RunSummary& s) {
  std::cout << "wrote " << s.files.size() << " files to " << s.directory << "\n";
  for (const auto& f : s.files) std::cout << "  " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-level Friedrichs model: resonances, survival probability, Zeno and anti-Zeno analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset;
  auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output.directory)");

  auto* pre = app.add_subcommand("preset", "run a built-in scenario");
  std::string names;
  for (const auto& n : fzeno::preset_names()) names += (names.empty() ? "" : ", ") + n;
  pre->add_option("name", preset, "one of: " + names)->required();
  pre->add_option("--out", out_dir, "output directory (default: the preset name)");
  bool dump_only = false;
  pre->add_flag("--print-config", dump_only, "print the preset config and exit");

  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", config_path, "scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*run) {
      print_summary(fzeno::run_scenario(fzeno::load_config(config_path), out_dir));
    } else if (*pre) {
      const auto c = fzeno::make_preset(preset);
      if (dump_only) {
        std::cout << fzeno::dump_config(c);
        return 0;
      }
      print_summary(fzeno::run_scenario(c, out_dir));
    } else if (*val) {
      const auto problems = fzeno::validate_config(fzeno::load_config(config_path));
      for (const auto& p : problems) std::cerr << "fzeno: " << p << "\n";
      if (!problems.empty()) return exit_config;
      std::cout << "ok\n";
    }
  } catch (const fzeno::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "fzeno: " << e.what() << "\n";
    return exit_numeric;
  }
  return 0;
}
