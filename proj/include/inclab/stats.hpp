#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace inclab {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double normal_cdf(double x);
double poisson_pmf(std::uint64_t k, double mean);
double poisson_cdf(std::uint64_t k, double mean);
// P(N > k) for N ~ Poisson(mean), computed without cancellation.
double poisson_tail_above(std::uint64_t k, double mean);
double binomial_cdf(std::uint64_t k, std::uint64_t trials, double p);

// Two-sided one-sample KS statistic sup|F_n - F| against a continuous cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
// Same for integer-valued samples against an integer-supported cdf; the
// supremum is attained on the support so only integer points are scanned.
double ks_statistic_discrete(std::span<const std::int64_t> samples,
                             const std::function<double(std::int64_t)>& cdf);
// Asymptotic Kolmogorov critical value sqrt(-log(alpha/2)/2)/sqrt(n).
// Conservative for discrete targets.
double ks_critical_value(std::size_t n, double alpha);

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};
MeanVar mean_var(std::span<const double> xs);
double sample_covariance(std::span<const double> xs, std::span<const double> ys);

}  // namespace inclab
