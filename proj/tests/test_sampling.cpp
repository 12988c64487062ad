#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "inclab/errors.hpp"
#include "inclab/sampling.hpp"
#include "inclab/stats.hpp"

using namespace inclab;

TEST(Sampling, PrefixProperty) {
  const auto big = sample_uniform(1000, 2, SeedStream(3));
  const auto small = sample_uniform(400, 2, SeedStream(3));
  const auto pre = big.prefix(400);
  ASSERT_EQ(pre.size(), 400u);
  EXPECT_EQ(pre.coords, small.coords);
  for (double x : big.coords) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Sampling, PoissonVariateLaw) {
  // Both generators: inversion (small mean) and transformed rejection.
  for (double mean : {0.7, 4.0, 37.5, 1000.0}) {
    RandomEngine rng(SeedStream(77).child(static_cast<std::uint64_t>(mean * 10)));
    std::vector<std::int64_t> xs(20000);
    for (auto& x : xs) x = static_cast<std::int64_t>(poisson_variate(rng, mean));
    const double ks = ks_statistic_discrete(
        xs, [&](std::int64_t k) { return k < 0 ? 0.0 : poisson_cdf(static_cast<std::uint64_t>(k), mean); });
    EXPECT_LT(ks, ks_critical_value(xs.size(), 1e-4)) << "mean " << mean;
  }
}

TEST(Sampling, WienerSheetCovariance) {
  const GridSpec spec(2, 4);
  const int reps = 20000;
  double s_ab = 0, s_aa = 0;
  for (int r = 0; r < reps; ++r) {
    const auto w = sample_wiener_sheet(spec, SeedStream(5).child(r));
    const int a[2] = {2, 4}, b[2] = {4, 3};
    s_ab += w.at(a) * w.at(b);
    s_aa += w.at(a) * w.at(a);
  }
  // Cov(W(1/2, 1), W(1, 3/4)) = 1/2 * 3/4; Var W(1/2, 1) = 1/2.
  EXPECT_NEAR(s_ab / reps, 0.375, 5 * std::sqrt((0.5 * 0.75 + 0.375 * 0.375) / reps));
  EXPECT_NEAR(s_aa / reps, 0.5, 5 * std::sqrt(2 * 0.25 / reps));
}

TEST(Sampling, PoissonSheetCountsAreIntegers) {
  const auto p = sample_poisson_sheet(40.0, GridSpec(2, 4), SeedStream(1));
  for (double v : p.cell_mass()) EXPECT_EQ(v, std::round(v));
}

TEST(Sampling, BrownianIncrements) {
  const double dt = 1e-4;
  const auto path = sample_brownian_path(100000, dt, SeedStream(8));
  ASSERT_EQ(path.size(), 100001u);
  EXPECT_EQ(path[0], 0.0);
  double q = 0;
  for (std::size_t i = 1; i < path.size(); ++i) q += (path[i] - path[i - 1]) * (path[i] - path[i - 1]);
  // quadratic variation over [0, 10]
  EXPECT_NEAR(q, 10.0, 5 * std::sqrt(2.0 * 100000) * dt);
}

TEST(Sampling, PointCloudFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "inclab_test_cloud";
  std::filesystem::create_directories(dir);
  const auto cloud = sample_uniform(257, 3, SeedStream(12).child(4));
  write_point_cloud(cloud, dir / "c.bin");
  const auto back = read_point_cloud(dir / "c.bin");
  EXPECT_EQ(back.d, 3);
  EXPECT_EQ(back.coords, cloud.coords);
  EXPECT_EQ(back.seed.root(), 12u);
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "NOTMAGIC";
  }
  EXPECT_THROW(read_point_cloud(dir / "bad.bin"), DomainError);
  std::filesystem::remove_all(dir);
}
