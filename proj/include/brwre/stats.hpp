#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace brwre {

struct SampleMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double skewness = 0.0;  ///< g1 = m3 / m2^{3/2}
  double excess_kurtosis = 0.0;  ///< g2 = m4 / m2^2 - 3
  double sd() const;
  double stderr_mean() const;
};

SampleMoments sample_moments(std::span<const double> xs);

double quantile_sorted(std::span<const double> sorted, double p);
double median(std::vector<double> xs);

double normal_quantile(double p);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for k successes out of n at two-sided level.
Interval wilson_interval(long long k, long long n, double level = 0.95);

/// Upper tail P[chi2_dof >= stat].
double chi_square_sf(double stat, double dof);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Pearson chi-square test of equiprobable cells.
TestResult chi_square_uniform(std::span<const long long> counts);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

/// One-sample KS test against N(mean, sd^2). The p-value uses Stephens'
/// finite-n scaling (sqrt n + 0.12 + 0.11/sqrt n) D.
TestResult ks_test_normal(std::span<const double> xs, double mean = 0.0, double sd = 1.0);

/// Two-sample KS test, asymptotic p-value at sqrt(n m / (n + m)) D.
TestResult ks_test_two_sample(std::span<const double> a, std::span<const double> b);

/// Percentile bootstrap. statistic(weights) receives resample multiplicities.
Interval bootstrap_percentile(std::size_t n, int resamples, double level, std::uint64_t seed,
                             const std::function<double(const std::vector<int>&)>& statistic);

/// log of the sample mean of exp(log_w).
double log_mean_exp(std::span<const double> log_w);

/// Percentile bootstrap CI of log_mean_exp.
Interval bootstrap_log_mean(std::span<const double> log_w, int resamples, double level,
                            std::uint64_t seed);

}  // namespace brwre
