#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "feasibility_oracle.hpp"
#include "inclab/errors.hpp"
#include "inclab/rate.hpp"
#include "inclab/seed.hpp"

using namespace inclab;

namespace {

GridFunction density(int d, int m, std::vector<double> g) { return GridFunction::from_density(GridSpec(d, m), g); }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Rate, ClosedForms) {
  EXPECT_LE(rel(rate_J(density(1, 1, {2})).value, 4.0), 1e-12);
  EXPECT_LE(rel(rate_J(density(2, 3, std::vector<double>(9, 2.0))).value, 4.0), 1e-12);
  EXPECT_EQ(rate_poisson(density(1, 4, {1, 1, 1, 1})).value, 0.0);
  EXPECT_EQ(rate_poisson(density(3, 2, std::vector<double>(8, 1.0))).value, 0.0);
  const double step = 0.5 * (2 * std::log(2.0) - 1) + 0.5;
  EXPECT_LE(rel(rate_poisson(density(1, 2, {2, 0})).value, step), 1e-12);
  // piecewise J: (1^2 + 3^2) / 2
  EXPECT_LE(rel(rate_J(density(1, 2, {1, -3})).value, 5.0), 1e-12);
}

TEST(Rate, PoissonConventions) {
  EXPECT_EQ(poisson_h(0.0), 1.0);
  EXPECT_EQ(poisson_h(0.0, HZero::literal), 0.0);
  EXPECT_EQ(poisson_h(1.0), 0.0);
  EXPECT_TRUE(std::isinf(poisson_h(-0.1)));
  const auto neg = rate_poisson(density(1, 2, {2, -1}));
  EXPECT_FALSE(neg.finite);
  EXPECT_FALSE(neg.reason.empty());
  EXPECT_NEAR(rate_poisson(density(1, 2, {2, 0}), HZero::literal).value, 0.5 * (2 * std::log(2.0) - 1), 1e-15);
}

TEST(Rate, ScalingLaw) {
  RandomEngine rng(SeedStream(10));
  for (int c = 0; c < 50; ++c) {
    const int d = 1 + c % 3;
    const GridSpec spec(d, 2 + c % 3);
    std::vector<double> g(spec.cell_count());
    for (auto& x : g) x = rng.uniform() * 6 - 3;
    const auto f = GridFunction::from_density(spec, g);
    const double lambda = 0.1 + 4 * rng.uniform();
    EXPECT_LE(rel(rate_J(f.scaled(lambda)).value, lambda * lambda * rate_J(f).value), 1e-12);
  }
}

TEST(Rate, Convexity) {
  RandomEngine rng(SeedStream(11));
  const GridSpec spec(2, 3);
  for (int c = 0; c < 50; ++c) {
    std::vector<double> g(9), h(9);
    for (auto& x : g) x = 3 * rng.uniform();
    for (auto& x : h) x = 3 * rng.uniform();
    const auto f1 = GridFunction::from_density(spec, g);
    const auto f2 = GridFunction::from_density(spec, h);
    const double t = rng.uniform();
    const auto mid = combine(t, f1, 1 - t, f2);
    EXPECT_LE(rate_J(mid).value, t * rate_J(f1).value + (1 - t) * rate_J(f2).value + 1e-12);
    EXPECT_LE(rate_poisson(mid).value, t * rate_poisson(f1).value + (1 - t) * rate_poisson(f2).value + 1e-12);
  }
}

TEST(Feasibility, MonotoneInEpsilon) {
  RandomEngine rng(SeedStream(12));
  for (int c = 0; c < 20; ++c) {
    std::vector<double> g(4);
    for (auto& x : g) x = 4 * rng.uniform() - 1;
    const auto f = density(1, 4, g);
    for (auto kind : {BallKind::strassen, BallKind::gamma}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double eps : {0.0, 0.1, 0.3, 0.6, 1.0}) {
        BallSpec b = kind == BallKind::strassen ? BallSpec::strassen(eps) : BallSpec::gamma(1.0, eps);
        const auto rep = ball_feasibility(f, b);
        EXPECT_LE(rep.r, prev + 1e-9);
        EXPECT_LE(rep.lower, rep.upper + 1e-12);
        prev = rep.r;
      }
    }
  }
}

TEST(Feasibility, ZeroEpsilonIsRate) {
  const auto f = density(2, 2, {0.5, 1.5, 2.0, 1.0});
  EXPECT_NEAR(ball_feasibility(f, BallSpec::strassen(0.0)).r, rate_J(f).value, 1e-9);
  EXPECT_NEAR(ball_feasibility(f, BallSpec::gamma(1.0, 0.0)).r, rate_poisson(f).value, 1e-9);
}

TEST(Feasibility, WitnessIsFeasible) {
  const auto f = density(2, 3, {3, -1, 2, 0.5, 0.5, 4, -2, 1, 1});
  const auto rep = ball_feasibility(f, BallSpec::strassen(0.3));
  ASSERT_EQ(rep.witness.size(), 9u);
  const auto h = GridFunction::from_density(f.spec(), rep.witness);
  EXPECT_LE(sup_distance(h, f), 0.3 + 1e-9);
  EXPECT_NEAR(rate_J(h).value, rep.upper, 1e-9);
}

TEST(Feasibility, Membership) {
  const auto f = density(1, 3, {2, 2, 2});
  const auto in = ball_feasibility(f, BallSpec::strassen(0.6));
  EXPECT_EQ(in.status, Membership::non_member);  // r = 1.96
  EXPECT_EQ(ball_feasibility(f, BallSpec::strassen(1.1)).status, Membership::member);
  SolverOptions fast;
  fast.decision_only = true;
  EXPECT_EQ(ball_feasibility(f, BallSpec::strassen(1.1), fast).status, Membership::member);
  EXPECT_EQ(ball_feasibility(density(1, 2, {-3, 0}), BallSpec::gamma(2.0, 0.2)).status, Membership::non_member);
}

TEST(Feasibility, CorpusMatchesExhaustiveOracle) {
  std::ifstream in(INCLAB_TEST_DATA "/feasibility_corpus.json");
  ASSERT_TRUE(in);
  const auto corpus = nlohmann::json::parse(in);
  std::size_t checked = 0;
  for (const auto& c : corpus["instances"]) {
    const auto g = c["density"].get<std::vector<double>>();
    const auto f = density(1, static_cast<int>(g.size()), g);
    const double eps = c["epsilon"];
    const auto kind = c["kind"] == "strassen" ? BallKind::strassen : BallKind::gamma;
    const auto ball = kind == BallKind::strassen ? BallSpec::strassen(eps) : BallSpec::gamma(1.0, eps);
    const double r = ball_feasibility(f, ball).r;
    const double o = oracle::exhaustive_r(f, kind, eps);
    const std::string name = c["name"];
    if (std::isinf(o)) {
      EXPECT_TRUE(std::isinf(r)) << name;
    } else {
      EXPECT_NEAR(r, o, 1e-3) << name;
    }
    if (c.contains("expected_r")) {
      if (c["expected_r"].is_string()) {
        EXPECT_TRUE(std::isinf(r)) << name;
      } else {
        EXPECT_NEAR(r, c["expected_r"].get<double>(), 1e-9) << name;
      }
    }
    ++checked;
  }
  EXPECT_GE(checked, 60u);
}

TEST(Feasibility, BallSpecValidation) {
  EXPECT_THROW(BallSpec::gamma(0.0, 0.1).validate(), DomainError);
  EXPECT_THROW(BallSpec::strassen(-0.1).validate(), DomainError);
  const auto b = ball_spec_from_json(to_json(BallSpec::gamma(2.0, 0.25)));
  EXPECT_EQ(b.kind, BallKind::gamma);
  EXPECT_EQ(b.c, 2.0);
  EXPECT_EQ(b.epsilon, 0.25);
  EXPECT_EQ(b.threshold(), 0.5);
}
