#include <gtest/gtest.h>

#include <cmath>

#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

// reference values from scipy.stats / statsmodels

TEST(Stats, SampleMoments) {
  const std::vector<double> x{1, 2, 4, 7, 11, 3.5};
  const auto m = sample_moments(x);
  EXPECT_DOUBLE_EQ(m.mean, 4.75);
  EXPECT_NEAR(m.variance, 13.575, 1e-12);
  EXPECT_NEAR(m.skewness, 0.786824079673796, 1e-12);
  EXPECT_NEAR(m.excess_kurtosis, -0.6437532431854951, 1e-12);
}

TEST(Stats, ChiSquareAndKolmogorov) {
  EXPECT_NEAR(chi_square_sf(7.3, 4), 0.12085874882121235, 1e-13);
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967167735456, 1e-13);
  EXPECT_NEAR(kolmogorov_sf(1.36), 0.049485876755377876, 1e-13);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
}

TEST(Stats, Wilson) {
  const auto ci = wilson_interval(7, 50);
  EXPECT_NEAR(ci.lo, 0.06950833427016288, 1e-9);
  EXPECT_NEAR(ci.hi, 0.26186193710585537, 1e-9);
  const auto zero = wilson_interval(0, 100000);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_GT(zero.hi, 0.0);
}

TEST(Stats, KsAcceptsNormalRejectsExponential) {
  Rng rng(1);
  std::vector<double> z(2000), e(2000);
  for (auto& v : z) v = rng.normal();
  for (auto& v : e) v = rng.exponential() - 1.0;
  EXPECT_GT(ks_test_normal(z).p_value, 0.01);
  EXPECT_LT(ks_test_normal(e).p_value, 1e-6);
}

TEST(Stats, BootstrapLogMeanCoversTruth) {
  // log-normal weights: log E e^{N(0,1)} = 0.5
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(derive_seed(2, "boot-meta", static_cast<std::uint64_t>(rep)));
    std::vector<double> w(400);
    for (auto& v : w) v = rng.normal();
    const auto ci = bootstrap_log_mean(w, 500, 0.95, static_cast<std::uint64_t>(rep));
    covered += ci.contains(0.5);
  }
  EXPECT_GE(covered, 85);
}

TEST(Stats, Quantiles) {
  std::vector<double> x{3, 1, 2, 4};
  EXPECT_DOUBLE_EQ(median(x), 2.5);
  std::sort(x.begin(), x.end());
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(x, 1.0), 4.0);
}

TEST(Stats, TwoSampleKsStatistic) {
  const std::vector<double> a{0.1, 0.5, 0.9, 1.3, 2.2}, b{0.3, 0.35, 1.0, 1.1, 3.0, 4.0};
  EXPECT_NEAR(ks_test_two_sample(a, b).statistic, 1.0 / 3.0, 1e-15);  // scipy ks_2samp
  EXPECT_EQ(ks_test_two_sample(a, a).statistic, 0.0);
}
