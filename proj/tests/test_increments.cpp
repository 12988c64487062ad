#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "inclab/errors.hpp"
#include "inclab/increments.hpp"
#include "inclab/stats.hpp"

using namespace inclab;

namespace {

// Direct count over every point for every (anchor, offset) pair.
std::vector<double> brute_counts(const PointCloud& cloud, const WindowConfig& w) {
  const int d = w.t_spec.d, m = w.t_spec.m;
  const std::size_t P = w.t_spec.point_count();
  std::vector<double> out(w.anchor_count() * P, 0.0);
  std::vector<int> t(d);
  for (std::size_t ai = 0; ai < w.anchor_count(); ++ai) {
    const auto u = w.anchor(ai);
    for (std::size_t p = 0; p < P; ++p) {
      unflatten(p, m + 1, t);
      std::size_t c = 0;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto x = cloud.point(i);
        bool in = true;
        for (int k = 0; k < d && in; ++k) in = x[k] > u[k] && x[k] <= u[k] + w.a * (double(t[k]) / m);
        c += in;
      }
      out[ai * P + p] = static_cast<double>(c);
    }
  }
  return out;
}

WindowConfig window(int d, double a, int u_res, int m) {
  WindowConfig w;
  w.a = a;
  w.lo = 0.1;
  w.hi = 0.6;
  w.u_res = u_res;
  w.t_spec = GridSpec(d, m);
  return w;
}

}  // namespace

TEST(Increments, CountFieldMatchesBruteForce) {
  RandomEngine pick(SeedStream(2024));
  for (int c = 0; c < 24; ++c) {
    const int d = 1 + c % 3;
    const double a = 0.05 + 0.3 * pick.uniform();
    const int m = 1 + static_cast<int>(pick() % 5);
    const int u_res = d == 3 ? 3 : 2 + static_cast<int>(pick() % 6);
    const auto w = window(d, a, u_res, m);
    const auto cloud = sample_uniform(300, d, SeedStream(c));
    const auto fast = count_field(cloud, w);
    ASSERT_EQ(fast.values, brute_counts(cloud, w)) << "case " << c;
  }
}

TEST(Increments, PointsOnWindowEdges) {
  // x = u is excluded, x = u + a t included.
  PointCloud cloud;
  cloud.d = 1;
  cloud.coords = {0.25, 0.5, 0.375};
  WindowConfig w;
  w.a = 0.25;
  w.lo = 0.25;
  w.hi = 0.25;
  w.u_res = 1;
  w.t_spec = GridSpec(1, 2);
  const auto f = count_field(cloud, w);
  EXPECT_EQ(f.values, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(f.values, brute_counts(cloud, w));
}

TEST(Increments, ValidateRejectsWindowsOutsideCube) {
  auto w = window(1, 0.5, 4, 4);
  EXPECT_THROW(w.validate(), ConfigError);
  w.a = 0.4;
  EXPECT_NO_THROW(w.validate());
}

TEST(Increments, AnchorLattice) {
  const auto w = window(2, 0.1, 5, 2);
  EXPECT_EQ(w.anchor_count(), 25u);
  EXPECT_EQ(w.anchor_coordinate(4), 0.6);
  const auto u = w.anchor(7);
  EXPECT_EQ(w.anchor_index(u), 7u);
  const std::vector<double> off{0.1, 0.11};
  EXPECT_THROW(w.anchor_index(off), DomainError);
}

TEST(Increments, CenteringAndScaling) {
  const auto w = window(2, 0.2, 3, 2);
  const auto cloud = sample_uniform(500, 2, SeedStream(4));
  const auto raw = count_field(cloud, w);
  const auto cen = centered_field(cloud, 500, w);
  const double mass = 500 * 0.04;
  std::vector<int> t(2);
  for (std::size_t ai = 0; ai < w.anchor_count(); ++ai) {
    for (std::size_t p = 0; p < raw.offsets(); ++p) {
      unflatten(p, 3, t);
      const double expect = (raw.row(ai)[p] - mass * (t[0] / 2.0) * (t[1] / 2.0)) / std::sqrt(mass);
      EXPECT_NEAR(cen.row(ai)[p], expect, 1e-12);
    }
  }
  // slice carries the same lattice values
  const auto s = slice(cen, 4);
  for (std::size_t p = 0; p < cen.offsets(); ++p) EXPECT_DOUBLE_EQ(s.cdf()[p], cen.row(4)[p]);
  EXPECT_EQ(slice_at(cen, w.anchor(4)).cdf()[8], s.cdf()[8]);
}

TEST(Increments, CenteredFieldUsesPrefix) {
  const auto w = window(1, 0.1, 4, 4);
  const auto cloud = sample_uniform(2000, 1, SeedStream(6));
  const auto a = centered_field(cloud, 700, w);
  const auto b = centered_field(cloud.prefix(700), 700, w);
  EXPECT_EQ(a.values, b.values);
}

TEST(Increments, OccupationFraction) {
  const auto w = window(1, 0.1, 50, 4);
  const auto cen = centered_field(sample_uniform(3000, 1, SeedStream(2)), 3000, w);
  const FunctionalEvent always{"all", event::Always{}};
  const FunctionalEvent none{"none", event::SupBall{-1.0}};
  EXPECT_EQ(occupation_fraction(cen, always), 1.0);
  EXPECT_EQ(occupation_fraction(cen, none), 0.0);
  const FunctionalEvent neg{"neg", event::PointHalfSpace{{}, 0.0, true}};
  std::size_t hits = 0;
  for (std::size_t ai = 0; ai < w.anchor_count(); ++ai) hits += cen.row(ai)[4] <= 0.0;
  EXPECT_DOUBLE_EQ(occupation_fraction(cen, neg), double(hits) / w.anchor_count());
}

TEST(Increments, ThinnedWindowMatchesPoissonLaw) {
  // Endpoint count of the thinned route and of a full poissonized field
  // both follow Poisson(n a).
  const std::uint64_t n = 2000;
  const double a = 0.01;
  const GridSpec ts(1, 4);
  const double mean = n * a;
  auto cdf = [&](std::int64_t k) { return k < 0 ? 0.0 : poisson_cdf(static_cast<std::uint64_t>(k), mean); };
  std::vector<std::int64_t> thin, full;
  for (int r = 0; r < 4000; ++r) {
    RandomEngine rng(SeedStream(31).child(r));
    const auto g = sample_poissonized_window(n, a, ts, rng);
    thin.push_back(std::llround(g.cdf()[4] * std::sqrt(mean) + mean));
  }
  WindowConfig w;
  w.a = a;
  w.lo = 0.0;
  w.hi = 0.0;
  w.u_res = 1;
  w.t_spec = ts;
  for (int r = 0; r < 1000; ++r) {
    const auto f = poissonized_field(n, 1, w, SeedStream(32).child(r));
    full.push_back(std::llround(f.row(0)[4] * std::sqrt(mean) + mean));
  }
  EXPECT_LT(ks_statistic_discrete(thin, cdf), ks_critical_value(thin.size(), 1e-4));
  EXPECT_LT(ks_statistic_discrete(full, cdf), ks_critical_value(full.size(), 1e-4));
}

TEST(Increments, FieldFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "inclab_test_field";
  std::filesystem::create_directories(dir);
  const auto w = window(2, 0.2, 3, 3);
  const auto f = poissonized_field(400, 2, w, SeedStream(8));
  write_field(f, dir / "field");
  const auto g = read_field(dir / "field");
  EXPECT_EQ(g.values, f.values);
  EXPECT_EQ(g.mode, FieldMode::poissonized);
  EXPECT_EQ(g.n, f.n);
  EXPECT_EQ(g.eta, f.eta);
  EXPECT_EQ(g.config.t_spec, w.t_spec);
  EXPECT_EQ(g.seed, f.seed);
  std::filesystem::remove_all(dir);
}
