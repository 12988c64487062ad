#include <gtest/gtest.h>

#include <cmath>

#include "inclab/stats.hpp"

using namespace inclab;

namespace {

// Independent reference: log-space pmf summed term by term.
double pmf_ref(std::uint64_t k, double mu) {
  return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
}

double binom_ref(std::uint64_t k, std::uint64_t n, double p) {
  double s = 0;
  for (std::uint64_t i = 0; i <= k; ++i) {
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(p) +
                  (n - i) * std::log1p(-p));
  }
  return s;
}

}  // namespace

TEST(Stats, PoissonCdfAndTail) {
  for (double mu : {0.3, 1.0, 7.5, 131.95}) {
    double acc = 0;
    for (std::uint64_t k = 0; k < 400; ++k) {
      acc += pmf_ref(k, mu);
      EXPECT_NEAR(poisson_pmf(k, mu), pmf_ref(k, mu), 1e-13);
      EXPECT_NEAR(poisson_cdf(k, mu), acc, 1e-12);
      EXPECT_NEAR(poisson_cdf(k, mu) + poisson_tail_above(k, mu), 1.0, 1e-14);
    }
  }
  // deep tail without cancellation
  EXPECT_GT(poisson_tail_above(60, 1.0), 0.0);
  EXPECT_NEAR(poisson_tail_above(60, 1.0) / pmf_ref(61, 1.0), 1.0, 0.02);
}

TEST(Stats, BinomialCdf) {
  for (std::uint64_t k : {0u, 3u, 10u, 25u}) EXPECT_NEAR(binomial_cdf(k, 40, 0.3), binom_ref(k, 40, 0.3), 1e-12);
  EXPECT_DOUBLE_EQ(binomial_cdf(40, 40, 0.3), 1.0);
}

TEST(Stats, NormalCdf) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.0) - normal_cdf(-1.0), 0.682689492137086, 1e-14);
  EXPECT_NEAR(normal_cdf(-8.0), 6.22096057427178e-16, 1e-27);
}

TEST(Stats, KolmogorovSmirnov) {
  // Midpoint quantiles are at distance 1/(2n) from the uniform cdf.
  std::vector<double> xs;
  for (int i = 0; i < 10; ++i) xs.push_back((i + 0.5) / 10);
  EXPECT_NEAR(ks_statistic(xs, [](double x) { return x; }), 0.05, 1e-15);
  EXPECT_NEAR(ks_critical_value(10000, 1e-3), std::sqrt(-std::log(5e-4) / 2) / 100, 1e-15);

  const std::vector<std::int64_t> coins{0, 0, 1, 1, 1, 1};
  EXPECT_NEAR(ks_statistic_discrete(coins, [](std::int64_t k) { return k < 0 ? 0.0 : k == 0 ? 0.5 : 1.0; }),
              0.5 - 1.0 / 3, 1e-15);
}

TEST(Stats, CompensatedSumAndMoments) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 10; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_DOUBLE_EQ(s.value(), 10.0);
  const std::vector<double> xs{1, 2, 3, 4}, ys{2, 4, 6, 8};
  const auto mv = mean_var(xs);
  EXPECT_DOUBLE_EQ(mv.mean, 2.5);
  EXPECT_DOUBLE_EQ(mv.variance, 5.0 / 3);
  EXPECT_DOUBLE_EQ(sample_covariance(xs, ys), 10.0 / 3);
}
