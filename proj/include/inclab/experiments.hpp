#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inclab/events.hpp"
#include "inclab/grid.hpp"
#include "inclab/poissonization.hpp"
#include "inclab/seed.hpp"

namespace inclab {

// ---------------------------------------------------------------- reports

struct Verdict {
  std::string name;
  std::string criterion;  // acceptance criterion id ("AC6"), empty if none
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool hard = true;  // soft verdicts are reported but do not fail the run
  std::string detail;
};

// pass iff |value - target| <= tolerance.
Verdict within(std::string name, std::string criterion, double value, double target, double tolerance);
// pass iff value <= bound.
Verdict at_most(std::string name, std::string criterion, double value, double bound);

struct Report {
  std::string experiment;
  std::string banner;
  nlohmann::json config;
  nlohmann::json seed;
  nlohmann::json statistics = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;

  bool passed() const;
};

nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const Report& r);
std::string to_csv(const Report& r);
// Writes <dir>/<experiment>.json and <dir>/<experiment>.csv.
void write_report(const Report& r, const std::filesystem::path& dir);

// ---------------------------------------------------------------- configs

// Window geometry shared by the field experiments: I = [lo, hi]^d,
// anchors on a u_res^d lattice, offsets on an m-lattice.
struct AnchorGrid {
  double lo = 0.25;
  double hi = 0.65;
  int u_res = 2000;
  int m = 32;
};

struct IntervalSet {
  std::string name;
  double lo = 0.0;  // -inf allowed
  double hi = 0.0;  // +inf allowed
  double tolerance = 0.01;
  std::string criterion;
};

struct WschConfig {
  double dt = 1e-6;
  double a = 0.0;
  double b = 1.0;
  std::vector<double> epsilons{1e-3};
  std::vector<IntervalSet> sets;
};

struct EventCheck {
  FunctionalEvent event;
  std::optional<double> target;  // absent: Wiener-sheet Monte Carlo
  double tolerance = 0.05;
  std::string criterion;
};

struct Theorem1Config {
  int d = 1;
  std::vector<std::uint64_t> n{200000};
  double beta = 0.6;  // a_n = n^-beta
  AnchorGrid grid{};
  std::size_t mc_paths = 100000;
  std::vector<EventCheck> events;
  std::vector<double> oscillation_deltas{0.5, 0.25, 0.125};
  double oscillation_eps = 0.5;
};

struct CharCase {
  std::vector<std::vector<double>> points;
  std::vector<double> thetas;
  double tolerance = 0.04;
  std::string criterion;
};

struct CharConfig {
  int d = 1;
  std::uint64_t n = 200000;
  double beta = 0.6;
  AnchorGrid grid{0.25, 0.65, 2000, 10};
  std::vector<CharCase> cases;
};

struct VarianceConfig {
  int d = 1;
  std::vector<std::uint64_t> n{10000, 100000};
  double beta = 0.6;
  // Extra run at this n with a_n doubled.
  std::optional<std::uint64_t> doubling_n = 100000;
  double lo = 0.25;
  double hi = 0.65;
  double anchor_spacing = 0.25;  // anchor pitch as a fraction of a_n
  int m = 4;
  std::size_t replicas = 200;
  FunctionalEvent event;
  double band = 4.0;
  std::size_t reference_replicas = 100000;  // only for events without an exact law
};

struct CltConfig {
  std::uint64_t n = 1000000;
  double beta = 0.4;
  int m = 10;
  std::size_t replicas = 10000;
  double alpha = 1e-3;
  std::vector<std::vector<double>> marginals{{1.0}, {0.5}, {0.7}};
  std::vector<std::vector<double>> pair{{0.5}, {0.7}};
  double cov_tolerance = 0.03;
  double mean_tolerance = 0.03;
};

struct Theorem2Config {
  int d = 1;
  double beta = 0.5;
  std::uint64_t n_min = 10000;
  std::uint64_t n_max = 1000000;
  std::vector<std::uint64_t> trend_n{10000, 100000, 1000000};
  AnchorGrid grid{0.25, 0.65, 400, 16};
  double epsilon = 0.5;
  double trend_tolerance = 0.05;
  // Targets f = integral of a constant density.
  std::vector<double> target_densities{0.0, 0.5, -0.5};
  double sup_fraction_floor = 0.9;
};

struct Theorem3Config {
  int d = 1;
  double c = 2.0;
  std::vector<std::uint64_t> n{10000, 100000, 1000000};
  AnchorGrid grid{0.25, 0.65, 200, 8};
  double epsilon = 0.5;
  std::vector<double> target_densities{1.0, 1.5, 0.5};
  std::uint64_t law_n = 10000;
  std::size_t law_replicas = 10000;
  double alpha = 1e-3;
};

struct PoissonizationConfig {
  Factor2CampaignConfig factor2{};
  IndependenceCampaignConfig independence{};
  std::size_t exists_forall_cases = 100;
};

inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 42;
  WschConfig wschebor;
  Theorem1Config theorem1;
  CharConfig char_functional;
  VarianceConfig variance;
  CltConfig clt;
  Theorem2Config theorem2;
  Theorem3Config theorem3;
  PoissonizationConfig poissonization;

  // Defaults are the acceptance-scale settings.
  static ExperimentConfig defaults();
  // Applies --replicas to every replica-driven experiment.
  void override_replicas(std::size_t replicas);
};

// Unknown keys are rejected so that typos do not silently fall back to
// defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

// Seed stream of one experiment under the root seed.
SeedStream experiment_seed(std::uint64_t root, const std::string& experiment);

// ----------------------------------------------------------- schedules

double log_log(double n);
// floor(exp(k / log k)) for k >= 3, deduplicated, restricted to [n_min, n_max].
std::vector<std::uint64_t> subsequence_schedule(std::uint64_t n_min, std::uint64_t n_max);

struct ScheduleRatios {
  std::uint64_t n = 0;
  double a = 0.0;
  double window_mass = 0.0;  // n a^d
  double scale_ratio = 0.0;  // log(1/a) / log log n
  double mass_ratio = 0.0;   // n a^d / log log n
};
ScheduleRatios schedule_ratios(std::uint64_t n, double a, int d);
nlohmann::json to_json(const ScheduleRatios& r);

// Covariance of the Wiener sheet at t_1..t_p: prod_j min(t_k^j, t_k'^j).
std::vector<std::vector<double>> sheet_covariance(const std::vector<std::vector<double>>& points);

// ----------------------------------------------------------- experiments

Report run_wschebor(const WschConfig& config, const SeedStream& seed);
Report run_theorem1(const Theorem1Config& config, const SeedStream& seed);
Report char_functional_check(const CharConfig& config, const SeedStream& seed);
Report variance_decay_check(const VarianceConfig& config, const SeedStream& seed);
Report poissonized_clt_check(const CltConfig& config, const SeedStream& seed);
Report run_theorem2(const Theorem2Config& config, const SeedStream& seed);
Report run_theorem3(const Theorem3Config& config, const SeedStream& seed);
Report run_poissonization_suite(const PoissonizationConfig& config, const SeedStream& seed);

// Experiment names as used by the CLI, in run order for "all".
const std::vector<std::string>& experiment_names();
Report run_experiment(const std::string& name, const ExperimentConfig& config);

}  // namespace inclab
