#include <gtest/gtest.h>

#include <cmath>

#include "brwre/fk_oracle.hpp"
#include "brwre/pam_solver.hpp"
#include "brwre/rng.hpp"

using namespace brwre;

TEST(WalkGenerator, HoldingTimeMean) {
  for (auto [d, kappa] : {std::pair{1, 1.0}, std::pair{2, 0.3}, std::pair{3, 2.0}}) {
    const WalkGenerator walk(d, kappa);
    Rng rng(derive_seed(5, "walk-test", static_cast<std::uint64_t>(d)));
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += walk.holding_time(rng);
    const double expected = 1.0 / (2.0 * d * kappa);
    EXPECT_NEAR(sum / n / expected, 1.0, 0.01) << d;
  }
}

TEST(WalkGenerator, DirectionsUniform) {
  for (int d : {1, 2, 3}) {
    const WalkGenerator walk(d, 1.0);
    Rng rng(derive_seed(6, "walk-test", static_cast<std::uint64_t>(d)));
    std::vector<long long> counts(static_cast<std::size_t>(2 * d), 0);
    for (int i = 0; i < 100000; ++i) ++counts[static_cast<std::size_t>(walk.direction(rng))];
    EXPECT_GT(chi_square_uniform(counts).p_value, 0.001) << d;
  }
}

TEST(FkEstimate, KappaZeroIsDeterministic) {
  const auto env = sample_environment(TailFamily::weibull(2), 1, 3, 1);
  const auto e = fk_estimate(env, Site{}, 0.0, 2.5, std::nullopt, 100, 7);
  EXPECT_DOUBLE_EQ(e.log_mean, env.v(Site{}) * 2.5);
  EXPECT_EQ(e.log_stderr, 0.0);
  EXPECT_EQ(e.n_killed, 0);
}

TEST(FkEstimate, HardCoreNeighboursGiveNoJumpProbability) {
  const auto env = Environment::from_potential(Box::centered(1, 1), {-INFINITY, 0.0, -INFINITY});
  for (double t : {0.25, 0.5, 1.0}) {
    const auto e = fk_estimate(env, Site{}, 1.0, t, std::nullopt, 100000, 11);
    EXPECT_NEAR(e.log_mean, -2.0 * t, 3.0 * e.log_stderr) << t;
    EXPECT_GT(e.n_killed, 0);
  }
}

TEST(FkEstimate, HardCoreStartKillsEverything) {
  const auto env = Environment::from_potential(Box::centered(1, 1), {0.0, -INFINITY, 0.0});
  const auto e = fk_estimate(env, Site{}, 1.0, 1.0, std::nullopt, 100, 1);
  EXPECT_TRUE(e.all_killed);
  EXPECT_EQ(e.log_mean, -INFINITY);
}

TEST(FkEstimate, SurvivalProbabilityMatchesSolver) {
  const auto env = Environment::constant(1, 6, 0.0);
  for (int r : {1, 2, 4}) {
    const Box box = Box::centered(1, r);
    const auto e = fk_estimate(env, Site{}, 1.0, 1.5, box, 100000, 21);
    const double ref = solve_truncated(env, box, 1.0, 1.5).log_value(Site{});
    EXPECT_NEAR(e.log_mean, ref, 3.0 * e.log_stderr) << r;
  }
}

TEST(FkEstimate, AgreesWithSolverOnRandomEnvironments) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto env = sample_environment(TailFamily::weibull(2), 1, 30, 300 + seed);
    const auto e = fk_estimate(env, Site{}, 1.0, 2.0, std::nullopt, 100000, seed);
    const auto m = solve_untruncated(env, Site{}, 1.0, 2.0, 1e-10);
    EXPECT_NEAR(e.log_mean, m.log_value(), 3.0 * e.log_stderr) << seed;
  }
}

TEST(FkEstimate, PathInclusionWithCommonRandomNumbers) {
  const auto env = sample_environment(TailFamily::double_exp(1), 1, 30, 4);
  const auto full = fk_estimate(env, Site{}, 1.0, 2.0, std::nullopt, 20000, 8);
  double prev = -INFINITY;
  for (int r : {0, 1, 2, 3, 5, 8}) {
    const auto boxed = fk_estimate(env, Site{}, 1.0, 2.0, Box::centered(1, r), 20000, 8);
    EXPECT_LE(boxed.log_mean, full.log_mean + 1e-12) << r;
    EXPECT_GE(boxed.log_mean, prev - 1e-12) << r;
    prev = boxed.log_mean;
  }
}

TEST(FkEstimate, IndependentOfThreadCount) {
  const auto env = sample_environment(TailFamily::weibull(2), 2, 12, 9);
  const auto a = fk_estimate(env, Site{}, 0.7, 1.5, std::nullopt, 10000, 3, 1);
  const auto b = fk_estimate(env, Site{}, 0.7, 1.5, std::nullopt, 10000, 3, 4);
  EXPECT_EQ(a.log_mean, b.log_mean);
  EXPECT_EQ(a.log_stderr, b.log_stderr);
  EXPECT_EQ(a.n_killed, b.n_killed);
}

TEST(FkEstimate, SmallWindowIsReported) {
  const auto env = Environment::constant(1, 1, 0.0);
  EXPECT_THROW(fk_estimate(env, Site{}, 1.0, 5.0, std::nullopt, 1000, 1), WindowTooSmall);
}

TEST(ExitTail, BoundHoldsOnGrid) {
  for (int x : {1, 2, 3, 4, 5}) {
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const auto e = exit_tail_mc(1.0, 1, x, t, 100000, 77);
      EXPECT_LE(e.ci.hi, e.bound) << x << " " << t;
    }
  }
}

TEST(ExitTail, MatchesDirichletSurvival) {
  const auto env = Environment::constant(1, 8, 0.0);
  for (int x : {1, 3, 5}) {
    const double t = 1.5;
    const auto e = exit_tail_mc(1.0, 1, x, t, 100000, 5);
    const double survive = std::exp(solve_truncated(env, Box::centered(1, x - 1), 1.0, t).log_value(Site{}));
    const double se = std::sqrt(e.p_hat * (1 - e.p_hat) / 100000.0);
    EXPECT_NEAR(e.p_hat, 1.0 - survive, 3.0 * se + 1e-12) << x;
  }
}

TEST(ExitTail, Degenerate) {
  const auto zero = exit_tail_mc(1.0, 1, 0, 1.0, 1000, 1);
  EXPECT_EQ(zero.p_hat, 1.0);
  EXPECT_DOUBLE_EQ(zero.bound, 4.0);
  EXPECT_TRUE(zero.bound_holds());
  const auto fast = exit_tail_mc(1.0, 1, 3, 1e-4, 10000, 1);
  EXPECT_EQ(fast.p_hat, 0.0);
}
