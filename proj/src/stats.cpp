#include "inclab/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "inclab/errors.hpp"

namespace inclab {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double poisson_pmf(std::uint64_t k, double mean) {
  if (mean <= 0) return k == 0 ? 1.0 : 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(kk * std::log(mean) - mean - std::lgamma(kk + 1.0));
}

double poisson_cdf(std::uint64_t k, double mean) {
  if (mean <= 0) return 1.0;
  return boost::math::cdf(boost::math::poisson_distribution<double>(mean), static_cast<double>(k));
}

double poisson_tail_above(std::uint64_t k, double mean) {
  if (mean <= 0) return 0.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::poisson_distribution<double>(mean), static_cast<double>(k)));
}

double binomial_cdf(std::uint64_t k, std::uint64_t trials, double p) {
  if (k >= trials) return 1.0;
  return boost::math::cdf(boost::math::binomial_distribution<double>(static_cast<double>(trials), p),
                          static_cast<double>(k));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS statistic needs at least one sample");
  std::ranges::sort(samples);
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic_discrete(std::span<const std::int64_t> samples,
                             const std::function<double(std::int64_t)>& cdf) {
  if (samples.empty()) throw DomainError("KS statistic needs at least one sample");
  std::vector<std::int64_t> sorted(samples.begin(), samples.end());
  std::ranges::sort(sorted);
  const double n = static_cast<double>(sorted.size());
  const std::int64_t lo = sorted.front();
  const std::int64_t hi = sorted.back();
  // Below the smallest observation the empirical cdf is 0.
  double d = cdf(lo - 1);
  std::size_t i = 0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    while (i < sorted.size() && sorted[i] <= x) ++i;
    d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(x)));
  }
  // Above the largest observation the empirical cdf is 1.
  return std::max(d, 1.0 - cdf(hi));
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || alpha <= 0 || alpha >= 1) throw DomainError("invalid KS critical value request");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

MeanVar mean_var(std::span<const double> xs) {
  MeanVar mv;
  if (xs.empty()) return mv;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  mv.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum q;
    for (double x : xs) q.add((x - mv.mean) * (x - mv.mean));
    mv.variance = q.value() / static_cast<double>(xs.size() - 1);
  }
  return mv;
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ShapeError("covariance needs paired samples");
  const double mx = mean_var(xs).mean;
  const double my = mean_var(ys).mean;
  CompensatedSum s;
  for (std::size_t i = 0; i < xs.size(); ++i) s.add((xs[i] - mx) * (ys[i] - my));
  return s.value() / static_cast<double>(xs.size() - 1);
}

}  // namespace inclab
