#include <gtest/gtest.h>

#include <cmath>

#include "inclab/errors.hpp"
#include "inclab/experiments.hpp"

using namespace inclab;

TEST(Config, DefaultsRoundTrip) {
  const auto d = ExperimentConfig::defaults();
  const auto j = to_json(d);
  EXPECT_EQ(to_json(experiment_config_from_json(j)).dump(), j.dump());
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.theorem1.grid.u_res, 2000);
  EXPECT_EQ(d.theorem1.grid.m, 32);
  EXPECT_EQ(d.clt.replicas, 10000u);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(experiment_config_from_json({{"schema_version", 1}, {"seeed", 3}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"schema_version", 1}, {"clt", {{"replica", 10}}}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"schema_version", 1}, {"theorem2", {{"grid", {{"ures", 10}}}}}}),
               ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"schema_version", 2}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"schema_version", 1}, {"theorem1", {{"events", {{{"tolerance", 1}}}}}}}),
               ConfigError);
}

TEST(Config, PartialOverride) {
  const auto c = experiment_config_from_json({{"schema_version", 1}, {"seed", 9}, {"clt", {{"replicas", 20000}}}});
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.clt.replicas, 20000u);
  EXPECT_EQ(c.clt.n, ExperimentConfig::defaults().clt.n);
}

TEST(Config, ReplicaOverride) {
  auto c = ExperimentConfig::defaults();
  c.override_replicas(500);
  EXPECT_EQ(c.variance.replicas, 500u);
  EXPECT_EQ(c.clt.replicas, 500u);
}

TEST(Schedule, SubsequenceMatchesFormula) {
  std::vector<std::uint64_t> expect;
  for (int k = 3; k < 200; ++k) {
    const auto n = static_cast<std::uint64_t>(std::floor(std::exp(k / std::log(double(k)))));
    if (n < 100 || n > 100000) continue;
    if (expect.empty() || expect.back() != n) expect.push_back(n);
  }
  EXPECT_EQ(subsequence_schedule(100, 100000), expect);
  EXPECT_THROW(log_log(2.0), ConfigError);
  EXPECT_NEAR(log_log(1e6), std::log(std::log(1e6)), 1e-15);
}

TEST(Schedule, Ratios) {
  const std::uint64_t n = 200000;
  const double a = std::pow(double(n), -0.6);
  const auto r = schedule_ratios(n, a, 1);
  EXPECT_NEAR(r.window_mass, n * a, 1e-9);
  EXPECT_NEAR(r.scale_ratio, std::log(1 / a) / std::log(std::log(double(n))), 1e-12);
  EXPECT_GT(r.scale_ratio, 2.8);
  EXPECT_LT(r.scale_ratio, 3.0);
}

TEST(Schedule, SheetCovariance) {
  const auto c = sheet_covariance({{0.5, 1.0}, {1.0, 0.75}});
  EXPECT_DOUBLE_EQ(c[0][0], 0.5);
  EXPECT_DOUBLE_EQ(c[0][1], 0.375);
  EXPECT_DOUBLE_EQ(c[1][1], 0.75);
}

TEST(Reports, VerdictsAndCsv) {
  EXPECT_TRUE(within("x", "", 0.505, 0.5, 0.01).pass);
  EXPECT_FALSE(within("x", "", 0.52, 0.5, 0.01).pass);
  EXPECT_TRUE(at_most("y", "", 3.0, 3.0).pass);
  Report r;
  r.experiment = "demo";
  r.columns = {"name", "value"};
  r.rows = {{"plain", 1.5}, {"a,\"b\"", 2}};
  EXPECT_EQ(to_csv(r), "name,value\nplain,1.5\n\"a,\"\"b\"\"\",2\n");
  auto soft = within("s", "", 1, 0, 0);
  soft.hard = false;
  r.verdicts = {soft};
  EXPECT_TRUE(r.passed());
  r.verdicts.push_back(within("h", "", 1, 0, 0));
  EXPECT_FALSE(r.passed());
}

TEST(Experiments, SeedsAreNamed) {
  EXPECT_NE(experiment_seed(42, "clt").key(), experiment_seed(42, "char").key());
  EXPECT_EQ(experiment_seed(42, "clt").key(), experiment_seed(42, "clt").key());
  EXPECT_EQ(experiment_names().size(), 8u);
  EXPECT_THROW(run_experiment("nope", ExperimentConfig::defaults()), ConfigError);
}

TEST(Experiments, SmallRunsAreDeterministic) {
  auto c = ExperimentConfig::defaults();
  c.wschebor.dt = 1e-4;
  c.wschebor.epsilons = {1e-2};
  c.theorem1.n = {5000};
  c.theorem1.grid = {0.25, 0.65, 50, 4};
  c.theorem1.mc_paths = 500;
  for (const std::string name : {"wschebor", "theorem1"}) {
    const auto a = to_json(run_experiment(name, c)).dump();
    const auto b = to_json(run_experiment(name, c)).dump();
    EXPECT_EQ(a, b) << name;
  }
}

TEST(Experiments, ScheduleValidation) {
  auto c = ExperimentConfig::defaults();
  c.theorem1.beta = 1.5;  // a_n must shrink slower than 1/n
  EXPECT_THROW(run_experiment("theorem1", c), ConfigError);
  c = ExperimentConfig::defaults();
  c.wschebor.epsilons = {1e-3, 1e-2};  // must decrease
  EXPECT_THROW(run_experiment("wschebor", c), ConfigError);
  c = ExperimentConfig::defaults();
  c.clt.replicas = 100;
  EXPECT_THROW(run_experiment("clt", c), ConfigError);
}
