#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "brwre/tail_analytics.hpp"

using namespace brwre;

namespace {

// Reference values computed with mpmath at 30 digits (tests/oracles/tail_oracle.py).
struct HRef {
  double t, h;
};
const std::vector<HRef> kWeibull2{{0.5, 0.47127327616778517093}, {1, 1.0043874786615188876},
                                  {2, 2.2903288950303953886},    {2.5, 3.0598718668096210854},
                                  {3, 3.9238473968333224928},    {6, 11.364124971325095021},
                                  {10, 27.874950035918760585},   {40, 404.26124439703863639}};
const std::vector<HRef> kFrechet1{{0.5, -0.81115956434206853631},
                                  {1, -1.2739241220005685821},
                                  {4, -2.9970532346575960048},
                                  {20, -7.5831898365187499016}};
const std::vector<HRef> kSqDoubleExp{{0.5, 0.15170657856370897197},
                                     {1, 0.34825800527436763221},
                                     {3, 1.6357061186598957761},
                                     {8, 6.8741909137028339084}};

std::vector<TailFamily> continuous_families() {
  return {TailFamily::weibull(2),       TailFamily::weibull(1.5),  TailFamily::weibull(3),
          TailFamily::double_exp(1),    TailFamily::double_exp(0.5), TailFamily::squared_double_exp(),
          TailFamily::frechet(1),       TailFamily::frechet(2.5)};
}

}  // namespace

TEST(CumulantH, WeibullAgainstReference) {
  for (const auto& r : kWeibull2)
    EXPECT_NEAR(cumulant_H(TailFamily::weibull(2), r.t), r.h, 1e-9 * std::max(1.0, r.h)) << r.t;
  EXPECT_NEAR(cumulant_H(TailFamily::weibull(3), 1.0), 0.94647650166262235956, 1e-9);
  EXPECT_NEAR(cumulant_H(TailFamily::weibull(3), 3.0), 3.1685891411990801655, 1e-9);
}

TEST(CumulantH, FrechetAgainstBesselForm) {
  for (const auto& r : kFrechet1) EXPECT_NEAR(cumulant_H(TailFamily::frechet(1), r.t), r.h, 1e-9) << r.t;
}

TEST(CumulantH, SquaredDoubleExpAgainstReference) {
  for (const auto& r : kSqDoubleExp)
    EXPECT_NEAR(cumulant_H(TailFamily::squared_double_exp(), r.t), r.h, 1e-9) << r.t;
}

TEST(CumulantH, DoubleExpMatchesLogGamma) {
  for (double rho : {0.5, 1.0, 2.5}) {
    for (double t : {0.1, 0.5, 2.0, 7.0, 15.0}) {
      EXPECT_NEAR(cumulant_H(TailFamily::double_exp(rho), t), std::lgamma(1.0 + rho * t),
                  1e-9 * std::max(1.0, std::lgamma(1.0 + rho * t)))
          << rho << " " << t;
    }
  }
}

TEST(CumulantH, HardCoreIsConstant) {
  EXPECT_NEAR(cumulant_H(TailFamily::hard_core(0.5), 7.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(cumulant_H(TailFamily::hard_core(0.5), 0.0), std::log(0.5), 1e-15);
}

TEST(CumulantH, ZeroAtTimeZero) {
  for (const auto& f : continuous_families()) EXPECT_EQ(cumulant_H(f, 0.0), 0.0) << f.name();
}

TEST(CumulantH, WeibullSaddlePoint) {
  const double h = cumulant_H(TailFamily::weibull(2), 40.0);
  EXPECT_NEAR(h / (40.0 * 40.0 / 4.0), 1.0, 0.15);
}

TEST(CumulantH, RejectsNegativeTime) {
  EXPECT_THROW(cumulant_H(TailFamily::weibull(2), -1.0), std::domain_error);
}

TEST(CumulantH, Superadditive) {
  for (const auto& f : continuous_families()) {
    std::vector<double> ts;
    for (int i = 1; i <= 20; ++i) ts.push_back(0.25 * i);
    std::vector<double> h;
    for (double t : ts) h.push_back(cumulant_H(f, t));
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const double lhs = cumulant_H(f, ts[i] + ts[j]);
        EXPECT_GE(lhs, h[i] + h[j] - 1e-9 * (1.0 + std::abs(lhs))) << f.name() << " " << ts[i] << " " << ts[j];
      }
    }
  }
}

TEST(CumulantH, NondecreasingForPositivePotentials) {
  for (const auto& f : {TailFamily::weibull(2), TailFamily::squared_double_exp()}) {
    double prev = cumulant_H(f, 0.0);
    for (double t = 0.1; t < 12.0; t += 0.1) {
      const double h = cumulant_H(f, t);
      EXPECT_GE(h, prev);
      prev = h;
    }
  }
}

TEST(TruncatedMoment, AgainstReference) {
  // E[e^{3v}; v <= 2] for Weibull rho=2, level cap 4
  EXPECT_NEAR(truncated_log_moment(TailFamily::weibull(2), 3.0, 4.0), 3.4375405233571174014, 1e-9);
  EXPECT_NEAR(truncated_log_moment(TailFamily::weibull(2), 3.0, INFINITY),
              cumulant_H(TailFamily::weibull(2), 3.0), 1e-12);
  EXPECT_NEAR(truncated_log_moment(TailFamily::weibull(2), 0.0, 2.0), std::log(-std::expm1(-2.0)), 1e-14);
}

TEST(CumulantG, NonnegativeForPositiveTheta) {
  std::vector<TailFamily> fams = continuous_families();
  fams.push_back(TailFamily::hard_core(0.3));
  for (const auto& f : fams) {
    for (double theta : {0.05, 0.25, 0.5, 1.0}) {
      for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        EXPECT_GE(cumulant_exponent_G(f, theta, t), -1e-9) << f.name() << " " << theta << " " << t;
      }
    }
  }
}

TEST(CumulantG, HardCoreConstant) {
  // H = log(1-p) constant, so G = -log(1-p) for every theta and t.
  const auto f = TailFamily::hard_core(0.3);
  for (double theta : {-0.5, 0.1, 1.0, 3.0})
    for (double t : {0.0, 1.0, 9.0}) EXPECT_NEAR(cumulant_exponent_G(f, theta, t), -std::log(0.7), 1e-14);
}

TEST(CumulantG, ReferenceValues) {
  EXPECT_NEAR(cumulant_exponent_G(TailFamily::weibull(2), 0.01, 10.0), 23.370083049397437145, 1e-6);
  EXPECT_NEAR(cumulant_exponent_G(TailFamily::weibull(2), 0.5, 2.0), 0.97670810857545881989, 1e-8);
}

TEST(CumulantG, SmallThetaLimit) {
  // G_theta(t) -> t H'(t) - H(t); the gap is first order in theta.
  const auto f = TailFamily::weibull(2);
  const double t = 10.0;
  const double limit = 23.125049964080455872;  // t H'(t) - H(t), mpmath
  double prev_gap = INFINITY;
  for (double theta : {0.04, 0.02, 0.01, 0.005, 0.0025}) {
    const double gap = std::abs(cumulant_exponent_G(f, theta, t) - limit);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(std::abs(cumulant_exponent_G(f, 0.005, t) / limit - 1.0), 0.01);
}

TEST(CumulantG, RejectsBadTheta) {
  EXPECT_THROW(cumulant_exponent_G(TailFamily::weibull(2), 0.0, 1.0), std::domain_error);
  EXPECT_THROW(cumulant_exponent_G(TailFamily::weibull(2), -1.0, 1.0), std::domain_error);
}

TEST(CumulantG, StrongIntermittencyTrendWeibull) {
  const auto f = TailFamily::weibull(2);
  for (double theta : {-0.25, -0.1, 0.1, 0.25}) {
    std::vector<double> vals;
    for (double t : {5.0, 10.0, 20.0, 40.0})
      vals.push_back((cumulant_exponent_G(f, 2 * theta, t) - cumulant_exponent_G(f, theta, t)) / (theta * t));
    for (std::size_t i = 1; i < vals.size(); ++i) EXPECT_GT(vals[i], vals[i - 1]) << theta;
    EXPECT_GT(vals.back(), 4.0 * vals.front()) << theta;
  }
}

TEST(CumulantH, KasaharaIndex) {
  for (double rho : {2.0, 3.0}) {
    const auto f = TailFamily::weibull(rho);
    const double lhs = std::log(cumulant_H(f, 80.0)) - std::log(cumulant_H(f, 40.0));
    const double rhs = rho / (rho - 1.0) * std::log(2.0);
    EXPECT_NEAR(lhs / rhs, 1.0, 0.10) << rho;
  }
}

TEST(RateI, ClosedFormValues) {
  EXPECT_EQ(rate_I(0.0), 0.0);
  EXPECT_NEAR(rate_I(1.0), std::log(1.0 + std::sqrt(2.0)) - std::sqrt(2.0) + 1.0, 1e-15);
  EXPECT_NEAR(rate_I(1.0), 0.46716002464644797643, 1e-15);
  EXPECT_NEAR(rate_I(2.5), 2.4254954623604872609, 1e-14);
  EXPECT_THROW(rate_I(-0.1), std::domain_error);
}

TEST(RateI, StrictlyIncreasing) {
  double prev = rate_I(0.0);
  for (double y = 1e-3; y < 50.0; y *= 1.1) {
    const double v = rate_I(y);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(RateI, LegendreTransform) {
  // sup_lambda {lambda y - (cosh lambda - 1)} by grid search plus golden refinement
  for (double y = 0.1; y <= 5.0 + 1e-12; y += 0.1) {
    auto obj = [y](double l) { return l * y - (std::cosh(l) - 1.0); };
    double best = 0.0;
    for (double l = 0.0; l <= 10.0; l += 0.01)
      if (obj(l) > obj(best)) best = l;
    double a = std::max(0.0, best - 0.01), b = best + 0.01;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      (obj(c) < obj(d) ? a : b) = obj(c) < obj(d) ? c : d;
    }
    EXPECT_NEAR(obj(0.5 * (a + b)), rate_I(y), 1e-10) << y;
  }
}

TEST(TransitionExponents, PaperValues) {
  const auto w = transition_exponents(TailFamily::weibull(2), 1);
  EXPECT_NEAR(w.gamma1, 1.0, 1e-12);
  EXPECT_NEAR(w.gamma2, 4.0, 1e-12);
  EXPECT_EQ(w.j_kind, GrowthKind::CumulantH);
  const auto de = transition_exponents(TailFamily::double_exp(1), 1);
  EXPECT_NEAR(de.gamma1, 1.0, 1e-12);
  EXPECT_NEAR(de.gamma2, 2.0, 1e-12);
  EXPECT_EQ(de.j_kind, GrowthKind::Linear);
  const auto fr = transition_exponents(TailFamily::frechet(1), 1);
  EXPECT_NEAR(fr.gamma1, 0.04, 1e-12);
  EXPECT_NEAR(fr.gamma2, std::pow(2.0, 0.96) * 0.04, 1e-12);
  EXPECT_EQ(fr.j_constant, "chi");
  const auto sq = transition_exponents(TailFamily::squared_double_exp(), 2);
  EXPECT_EQ(sq.gamma1, 1.0);
  EXPECT_EQ(sq.gamma2, 2.0);
  const auto hc = transition_exponents(TailFamily::hard_core(0.5), 2);
  EXPECT_TRUE(hc.empirical_only);
  EXPECT_NEAR(hc.gamma1, 0.5, 1e-15);
  EXPECT_EQ(hc.j_constant, "c2");
}

TEST(TransitionExponents, OrderedForAllFamilies) {
  for (int d = 1; d <= 3; ++d) {
    for (const auto& f : continuous_families()) {
      const auto e = transition_exponents(f, d);
      EXPECT_GT(e.gamma1, 0.0);
      EXPECT_GT(e.gamma2, e.gamma1);
    }
    const auto hc = transition_exponents(TailFamily::hard_core(0.2), d);
    EXPECT_GT(hc.gamma2, hc.gamma1);
  }
}

// The summary table of exponents prints the Weibull row as gamma1 = 1/(1-rho)
// and gamma2 = 2^{1-gamma1} gamma1. The proposition on Weibull tails derives
// gamma1 = 1/(rho-1) and gamma2 = 2^{rho/(rho-1)} gamma1. The two disagree
// (rho = 2: table gives gamma1 = -1, gamma2 = -4 or, with the proposition's
// gamma1 = 1, gamma2 = 1, against 4). The proposition is proved in the text,
// so the library follows it; this test pins the disagreement.
TEST(TransitionExponents, WeibullTableRowDisagreesWithProposition) {
  const double rho = 2.0;
  const auto e = transition_exponents(TailFamily::weibull(rho), 1);
  const double table_gamma1 = 1.0 / (1.0 - rho);
  const double table_gamma2_from_prop_gamma1 = std::pow(2.0, 1.0 - e.gamma1) * e.gamma1;
  EXPECT_NE(e.gamma1, table_gamma1);
  EXPECT_NEAR(table_gamma2_from_prop_gamma1, 1.0, 1e-15);
  EXPECT_NEAR(e.gamma2, 4.0, 1e-15);
  EXPECT_GT(std::abs(e.gamma2 - table_gamma2_from_prop_gamma1), 1.0);
  // The proposition's gamma2 is the limit of 2^{rho'} times the gamma1 expression.
  EXPECT_NEAR(e.gamma2, std::pow(2.0, rho / (rho - 1.0)) * e.gamma1, 1e-15);
}

TEST(CriticalA, KnownValues) {
  EXPECT_NEAR(critical_a(TailFamily::weibull(2), 1, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(critical_a(TailFamily::weibull(2), 1, 0.5), 0.9142135623730950488, 1e-15);
  for (double rho : {1.5, 3.0, 7.0}) {
    const auto f = TailFamily::weibull(rho);
    EXPECT_NEAR(critical_a(f, 1, transition_exponents(f, 1).gamma1), 1.0, 1e-12) << rho;
  }
  for (int d = 1; d <= 3; ++d) {
    for (double rho : {0.5, 1.0, 4.0}) {
      const auto f = TailFamily::frechet(rho);
      EXPECT_NEAR(critical_a(f, d, transition_exponents(f, d).gamma1), 1.0, 1e-12) << d << " " << rho;
    }
  }
  EXPECT_NEAR(critical_a(TailFamily::double_exp(1), 1, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(critical_a(TailFamily::double_exp(2), 1, 1.0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(critical_a(TailFamily::squared_double_exp(), 1, 0.5), 0.5 * std::exp(-0.5), 1e-15);
}

TEST(CriticalA, PositiveOnDomain) {
  for (const auto& f : continuous_families()) {
    const double g1 = transition_exponents(f, 1).gamma1;
    for (int k = 1; k <= 20; ++k) {
      const double a = critical_a(f, 1, g1 * k / 20.0);
      EXPECT_TRUE(std::isfinite(a));
      EXPECT_GT(a, 0.0);
    }
  }
}

TEST(CriticalA, RejectsOutsideDomain) {
  EXPECT_THROW(critical_a(TailFamily::weibull(2), 1, 0.0), std::domain_error);
  EXPECT_THROW(critical_a(TailFamily::weibull(2), 1, 1.5), std::domain_error);
  EXPECT_THROW(critical_a(TailFamily::hard_core(0.5), 1, 0.1), std::domain_error);
}

TEST(GrowthJ, Values) {
  EXPECT_EQ(growth_J(TailFamily::double_exp(1), 1, 5.0), 5.0);
  EXPECT_NEAR(growth_J(TailFamily::squared_double_exp(), 1, std::exp(4.0)), std::exp(4.0) / 4.0, 1e-12);
  EXPECT_NEAR(growth_J(TailFamily::weibull(2), 1, 3.0), cumulant_H(TailFamily::weibull(2), 3.0), 1e-15);
  EXPECT_THROW(growth_J(TailFamily::squared_double_exp(), 1, 2.0), std::domain_error);
  EXPECT_THROW(growth_J(TailFamily::double_exp(1), 1, 0.0), std::domain_error);
}

TEST(GrowthJ, FrechetScaleFunction) {
  const auto f = TailFamily::frechet(1);
  EXPECT_NEAR(frechet_alpha(f, 1, 10.0), 1.3180493278342844814, 1e-8);
  EXPECT_NEAR(frechet_alpha(f, 1, 50.0), 1.7564037775962374742, 1e-8);
  EXPECT_NEAR(growth_J(f, 1, 50.0), 16.207695892052230894, 1e-6);
  EXPECT_THROW(frechet_alpha(TailFamily::weibull(2), 1, 1.0), std::invalid_argument);
}
