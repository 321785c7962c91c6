#include "brwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "brwre/log_math.hpp"
#include "brwre/rng.hpp"

namespace brwre {

double SampleMoments::sd() const { return std::sqrt(variance); }
double SampleMoments::stderr_mean() const { return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : kNaN; }

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(m.n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(m.n);
  m.mean = mean;
  m.variance = m.n > 1 ? m2 / (n - 1.0) : 0.0;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double f = pos - static_cast<double>(i);
  return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, 0.5);
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

Interval wilson_interval(long long k, long long n, double level) {
  if (n <= 0) return {0.0, 1.0};
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double chi_square_sf(double stat, double dof) {
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

TestResult chi_square_uniform(std::span<const long long> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi-square needs at least two cells");
  double total = 0.0;
  for (long long c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long long c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return {stat, chi_square_sf(stat, static_cast<double>(counts.size() - 1))};
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;  // Q(0.2) = 1 - 5e-13 and the series converges slowly below
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test_normal(std::span<const double> xs, double mean, double sd) {
  if (xs.empty()) throw std::invalid_argument("KS test of an empty sample");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const boost::math::normal_distribution<> nd(mean, sd);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = boost::math::cdf(nd, s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)};
}

TestResult ks_test_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test of an empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return {d, kolmogorov_sf(std::sqrt(n * m / (n + m)) * d)};
}

Interval bootstrap_percentile(std::size_t n, int resamples, double level, std::uint64_t seed,
                             const std::function<double(const std::vector<int>&)>& statistic) {
  if (n == 0 || resamples < 1) throw std::invalid_argument("bootstrap needs data and resamples");
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  std::vector<int> mult(n);
  for (int b = 0; b < resamples; ++b) {
    Rng rng(derive_seed(seed, "bootstrap", static_cast<std::uint64_t>(b)));
    std::fill(mult.begin(), mult.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++mult[rng.below(n)];
    stats.push_back(statistic(mult));
  }
  std::sort(stats.begin(), stats.end());
  const double a = 0.5 * (1.0 - level);
  return {quantile_sorted(stats, a), quantile_sorted(stats, 1.0 - a)};
}

double log_mean_exp(std::span<const double> log_w) {
  if (log_w.empty()) return kNegInf;
  return log_sum_exp(log_w) - std::log(static_cast<double>(log_w.size()));
}

Interval bootstrap_log_mean(std::span<const double> log_w, int resamples, double level,
                            std::uint64_t seed) {
  double hi = kNegInf;
  for (double w : log_w) hi = std::max(hi, w);
  if (hi == kNegInf) return {kNegInf, kNegInf};
  std::vector<double> scaled(log_w.size());
  for (std::size_t i = 0; i < log_w.size(); ++i) scaled[i] = std::exp(log_w[i] - hi);
  const double n = static_cast<double>(log_w.size());
  return bootstrap_percentile(log_w.size(), resamples, level, seed, [&](const std::vector<int>& mult) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mult.size(); ++i) acc += mult[i] * scaled[i];
    return acc > 0.0 ? hi + std::log(acc / n) : kNegInf;
  });
}

}  // namespace brwre
