// increment-lab: run verification experiments and write JSON + CSV reports.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "inclab/errors.hpp"
#include "inclab/experiments.hpp"

namespace {

enum Exit { kOk = 0, kVerdictFailed = 1, kConfigError = 2 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification lab for local increments of the uniform empirical process"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::string out_dir = "reports";
  int verbosity = 0;
  app.add_option("--config", config_path, "experiment config (JSON); defaults to the acceptance-scale settings")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root seed override");
  app.add_option("--out", out_dir, "report directory")->capture_default_str();
  app.add_option("--replicas", replicas, "replica count override for replica-driven experiments");
  app.add_flag("-v", verbosity, "verbose output (-vv for more)");

  for (const auto& name : inclab::experiment_names()) {
    app.add_subcommand(name, "run the " + name + " experiment");
  }
  app.add_subcommand("all", "run every experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto config = config_path.empty() ? inclab::ExperimentConfig::defaults()
                                      : inclab::load_experiment_config(config_path);
    if (seed) config.seed = *seed;
    if (replicas) config.override_replicas(*replicas);

    std::vector<std::string> selected;
    if (command == "all") {
      selected = inclab::experiment_names();
    } else {
      selected = {command};
    }

    bool all_passed = true;
    nlohmann::json timing = nlohmann::json::object();
    for (const auto& name : selected) {
      if (verbosity > 0) std::cerr << "running " << name << " ...\n";
      const auto t0 = std::chrono::steady_clock::now();
      const auto report = inclab::run_experiment(name, config);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      timing[name] = seconds;
      inclab::write_report(report, out_dir);

      std::size_t hard = 0, hard_passed = 0;
      for (const auto& v : report.verdicts) {
        if (v.hard) {
          ++hard;
          hard_passed += v.pass ? 1 : 0;
        }
        if (verbosity > 0 && (verbosity > 1 || !v.pass)) {
          std::cout << "  [" << (v.pass ? "pass" : (v.hard ? "FAIL" : "soft-fail")) << "] " << v.name
                    << (v.criterion.empty() ? "" : " (" + v.criterion + ")") << ": value " << v.value << ", target "
                    << v.target << ", tolerance " << v.tolerance << (v.detail.empty() ? "" : "; " + v.detail)
                    << "\n";
        }
      }
      std::cout << name << ": " << (report.passed() ? "PASS" : "FAIL") << " (" << hard_passed << "/" << hard
                << " hard verdicts)\n";
      all_passed = all_passed && report.passed();
    }
    // Runtime lives outside the reports so that reports stay byte-identical.
    std::ofstream(std::filesystem::path(out_dir) / "timing.json") << timing.dump(2) << '\n';
    return all_passed ? kOk : kVerdictFailed;
  } catch (const inclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerdictFailed;
  }
}
