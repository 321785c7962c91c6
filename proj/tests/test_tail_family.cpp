#include <gtest/gtest.h>

#include <cmath>

#include "brwre/tail_family.hpp"

using namespace brwre;

TEST(TailFamily, RejectsInvalidParameters) {
  EXPECT_THROW(TailFamily::weibull(1.0), std::invalid_argument);
  EXPECT_THROW(TailFamily::weibull(0.5), std::invalid_argument);
  EXPECT_THROW(TailFamily::double_exp(0.0), std::invalid_argument);
  EXPECT_THROW(TailFamily::frechet(-1.0), std::invalid_argument);
  EXPECT_THROW(TailFamily::hard_core(0.0), std::invalid_argument);
  EXPECT_THROW(TailFamily::hard_core(1.0), std::invalid_argument);
  EXPECT_THROW(TailFamily::weibull(NAN), std::invalid_argument);
  EXPECT_NO_THROW(TailFamily::hard_core(0.5));
}

TEST(TailFamily, WeibullErrorMentionsConstraint) {
  try {
    TailFamily::weibull(0.5);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("rho > 1"), std::string::npos);
  }
}

TEST(TailFamily, NamesRoundTrip) {
  for (auto f : {TailFamily::weibull(2), TailFamily::double_exp(1), TailFamily::squared_double_exp(),
                 TailFamily::frechet(1), TailFamily::hard_core(0.3)}) {
    EXPECT_EQ(TailFamily::parse(f.name(), f.param()), f);
  }
  EXPECT_THROW(tail_kind_from_name("gauss"), std::invalid_argument);
  EXPECT_EQ(TailFamily::hard_core(0.5).param_string(), "p=0.5");
  EXPECT_EQ(TailFamily::weibull(2).param_string(), "rho=2");
}

TEST(TailQuantile, KnownValues) {
  const double u = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(tail_quantile(TailFamily::double_exp(1), u), 0.0, 1e-15);
  EXPECT_NEAR(tail_quantile(TailFamily::weibull(2), u), 1.0, 1e-15);
  EXPECT_EQ(tail_quantile(TailFamily::hard_core(0.3), 0.2), -INFINITY);
  EXPECT_EQ(tail_quantile(TailFamily::hard_core(0.3), 0.5), 0.0);
  EXPECT_THROW(tail_quantile(TailFamily::weibull(2), 0.0), std::domain_error);
  EXPECT_THROW(tail_quantile(TailFamily::weibull(2), 1.0), std::domain_error);
}

TEST(TailQuantile, DoubleExpMatchesLogLog) {
  for (double u : {0.01, 0.3, 0.77, 0.999}) {
    EXPECT_NEAR(tail_quantile(TailFamily::double_exp(1), u), std::log(-std::log1p(-u)), 1e-14);
  }
}

TEST(TailQuantile, CdfRoundTripContinuousFamilies) {
  for (auto f : {TailFamily::weibull(2), TailFamily::weibull(1.3), TailFamily::double_exp(1),
                 TailFamily::double_exp(3), TailFamily::frechet(1), TailFamily::frechet(0.4)}) {
    for (int k = 1; k < 100; ++k) {
      const double u = k / 100.0;
      EXPECT_NEAR(tail_cdf(f, tail_quantile(f, u)), u, 1e-12) << f.name() << " u=" << u;
    }
  }
  // Above the atom at 0 the squared double exponential is continuous.
  const auto s = TailFamily::squared_double_exp();
  for (double u : {0.7, 0.8, 0.95, 0.999})
    EXPECT_NEAR(tail_cdf(s, tail_quantile(s, u)), u, 1e-12);
}

TEST(TailQuantile, SquaredDoubleExpAtomAtZero) {
  const auto s = TailFamily::squared_double_exp();
  EXPECT_EQ(tail_quantile(s, 0.1), 0.0);
  EXPECT_EQ(tail_quantile(s, 0.6), 0.0);
  EXPECT_GT(tail_quantile(s, 0.64), 0.0);
  EXPECT_NEAR(tail_cdf(s, 0.0), 1.0 - std::exp(-1.0), 1e-15);
}

TEST(TailSurvival, MatchesDefinitions) {
  EXPECT_NEAR(tail_survival(TailFamily::weibull(2), 1.5), std::exp(-2.25), 1e-15);
  EXPECT_NEAR(tail_survival(TailFamily::double_exp(2), 1.0), std::exp(-std::exp(0.5)), 1e-15);
  EXPECT_NEAR(tail_survival(TailFamily::frechet(1), -0.5), std::exp(-2.0), 1e-15);
  EXPECT_EQ(tail_survival(TailFamily::frechet(1), 0.0), 0.0);
  EXPECT_NEAR(tail_survival(TailFamily::hard_core(0.3), -1.0), 0.7, 1e-15);
}
