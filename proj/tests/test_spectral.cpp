#include <gtest/gtest.h>

#include <cmath>

#include "brwre/pam_solver.hpp"
#include "brwre/rng.hpp"
#include "brwre/spectral.hpp"

using namespace brwre;

namespace {

Environment clipped_weibull(int dim, int radius, std::uint64_t seed, double vmax) {
  auto env = sample_environment(TailFamily::weibull(2), dim, radius, seed);
  std::vector<double> v(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) v[i] = std::min(env.v(i), vmax);
  return Environment::from_potential(env.window(), v);
}

}  // namespace

TEST(PrincipalEigen, Singleton) {
  for (double c : {-1.0, 0.0, 2.5}) {
    const auto env = Environment::constant(1, 0, c);
    const auto s = principal_eigen(env, Box::centered(1, 0), 1.0);
    EXPECT_NEAR(s.eigenvalues.front(), c - 2.0, 1e-14);
  }
}

TEST(PrincipalEigen, PathGraph) {
  // numpy: -2 + 2 cos(pi/(n+1))
  const std::vector<std::pair<int, double>> ref{
      {1, -1.9999999999999998}, {2, -0.9999999999999998}, {5, -0.2679491924311226}, {10, -0.08101405277100526}};
  for (auto [n, lam] : ref) {
    // n consecutive sites: put them in a window and kill the rest with hard core
    const int r = n;  // window [-n, n]
    std::vector<double> v(2 * r + 1, -INFINITY);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(r + i)] = 0.0;
    const auto env = Environment::from_potential(Box::centered(1, r), v);
    const auto s = principal_eigen(env, Box::centered(1, r), 1.0);
    EXPECT_NEAR(s.eigenvalues.front(), lam, 1e-12) << n;
    EXPECT_EQ(s.active_sites, static_cast<std::size_t>(n));
  }
}

TEST(PrincipalEigen, EigenvectorPositiveUnitResidual) {
  Rng rng(3);
  for (int inst = 0; inst < 100; ++inst) {
    const int dim = 1 + static_cast<int>(rng.below(2));
    const int radius = dim == 1 ? 3 + static_cast<int>(rng.below(30)) : 1 + static_cast<int>(rng.below(4));
    const TailFamily fam = inst % 3 == 0 ? TailFamily::hard_core(0.2) : TailFamily::double_exp(1);
    const auto env = sample_environment(fam, dim, radius, 500 + static_cast<std::uint64_t>(inst));
    if (env.hard_core_count() == env.size()) continue;
    const auto s = principal_eigen(env, env.window(), 0.5 + rng.uniform());
    double norm2 = 0.0, vmax = -INFINITY;
    for (std::size_t i = 0; i < s.psi0.size(); ++i) {
      EXPECT_GE(s.psi0[i], -1e-12);
      norm2 += s.psi0[i] * s.psi0[i];
      if (!env.hard_core(i)) vmax = std::max(vmax, env.v(i));
    }
    EXPECT_NEAR(norm2, 1.0, 1e-12);
    EXPECT_LE(s.residual, 1e-9);
    EXPECT_LE(s.eigenvalues.front(), vmax + 1e-12);
    for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) EXPECT_LE(s.eigenvalues[k], s.eigenvalues[k - 1]);
  }
}

TEST(PrincipalEigen, MonotoneInDomain) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto env = clipped_weibull(2, 6, seed, 5.0);
    double prev = -INFINITY;
    for (int r = 0; r <= 6; ++r) {
      const double l = principal_eigen(env, Box::centered(2, r), 1.0).eigenvalues.front();
      EXPECT_GE(l, prev - 1e-12);
      prev = l;
    }
  }
}

TEST(PrincipalEigen, LongTimeGrowthRate) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto env = clipped_weibull(1, 10, seed, 5.0);
    const auto s = principal_eigen(env, env.window(), 1.0);
    const double gap = s.eigenvalues[0] - s.eigenvalues[1];
    if (gap < 1e-8) continue;
    const double t = 50.0 / gap;
    const auto m = solve_truncated(env, env.window(), 1.0, t);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < s.psi0.size(); ++i)
      if (s.psi0[i] > s.psi0[peak]) peak = i;
    const double rate = m.log_value(peak) / t;
    EXPECT_NEAR(rate, s.eigenvalues[0], 0.02 * std::abs(s.eigenvalues[0])) << seed << " gap " << gap;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(PrincipalEigen, PowerIterationBeyondDenseLimit) {
  const auto env = clipped_weibull(2, 32, 9, 5.0);  // 4225 sites
  const auto s = principal_eigen(env, env.window(), 1.0);
  EXPECT_FALSE(s.dense);
  EXPECT_LE(s.residual, 1e-10);
  const double sub = principal_eigen(env, Box::centered(2, 10), 1.0).eigenvalues.front();
  EXPECT_GE(s.eigenvalues.front(), sub - 1e-12);
  double vmax = 0.0;
  for (std::size_t i = 0; i < env.size(); ++i) vmax = std::max(vmax, env.v(i));
  EXPECT_LE(s.eigenvalues.front(), vmax);
  for (double p : s.psi0) EXPECT_GE(p, -1e-9);
}

TEST(PrincipalEigen, EmptyActiveSetThrows) {
  const auto env = Environment::from_potential(Box::centered(1, 1), {-INFINITY, -INFINITY, -INFINITY});
  EXPECT_THROW(principal_eigen(env, env.window(), 1.0), std::invalid_argument);
}

TEST(VerifySandwich, RandomInstancesPositiveMargins) {
  Rng rng(17);
  int n = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int radius = 1 + static_cast<int>(rng.below(31));  // 3..63 sites
    const auto env = clipped_weibull(1, radius, 900 + static_cast<std::uint64_t>(inst), 5.0);
    for (double t : {0.5, 1.0, 2.0}) {
      const auto r = verify_sandwich(env, env.window(), 1.0, t);
      EXPECT_GT(r.lower_margin, 0.0);
      EXPECT_GT(r.upper_margin, 0.0);
      ++n;
    }
  }
  EXPECT_EQ(n, 300);
}

TEST(VerifySandwich, ConstantPotentialKappaZero) {
  const auto env = Environment::constant(1, 3, 1.5);
  const auto r = verify_sandwich(env, env.window(), 0.0, 2.0);
  // m = e^{ct} everywhere, lambda0 = c: sum = |U| e^{ct}
  EXPECT_NEAR(r.lower_margin, std::log(7.0), 1e-12);
  EXPECT_NEAR(r.upper_margin, 0.5 * std::log(7.0), 1e-12);
}

TEST(VerifySandwich, TimeZero) {
  const auto env = clipped_weibull(1, 4, 2, 5.0);
  const auto r = verify_sandwich(env, env.window(), 1.0, 0.0);
  EXPECT_NEAR(r.lower_margin, std::log(9.0), 1e-12);
  EXPECT_NEAR(r.upper_margin, 0.5 * std::log(9.0), 1e-12);
}
