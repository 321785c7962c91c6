#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brwre/environment.hpp"

using namespace brwre;

namespace {

std::string csv_of(const Environment& env) {
  std::ostringstream os;
  write_environment_csv(env, os);
  return os.str();
}

}  // namespace

TEST(Box, IndexSiteRoundTrip) {
  const Box b(3, Site{{2, -1, 4}}, 2);
  EXPECT_EQ(b.size(), 125u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_TRUE(b.contains(b.site(i)));
    EXPECT_EQ(b.index(b.site(i)), i);
  }
  EXPECT_FALSE(b.contains(Site{{5, -1, 4}}));
  EXPECT_TRUE(Box::centered(3, 6).contains(b));
  EXPECT_FALSE(Box::centered(3, 5).contains(b));
  EXPECT_THROW(Box(0, Site{}, 1), std::invalid_argument);
  EXPECT_THROW(Box(1, Site{}, -1), std::invalid_argument);
}

TEST(SampleEnvironment, HardCoreSmallWindow) {
  const auto env = sample_environment(TailFamily::hard_core(0.5), 1, 1, 42);
  EXPECT_EQ(env.size(), 3u);
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (env.hard_core(i)) {
      EXPECT_EQ(env.v(i), -INFINITY);
      EXPECT_EQ(env.v_minus(i), INFINITY);
    } else {
      EXPECT_EQ(env.v(i), 0.0);
    }
    EXPECT_EQ(env.v_plus(i), 0.0);
  }
}

TEST(SampleEnvironment, HardCoreFractionBinomial) {
  // 100001 sites; band is 3 binomial standard deviations
  const auto env = sample_environment(TailFamily::hard_core(0.5), 1, 50000, 7);
  const double n = static_cast<double>(env.size());
  const double frac = static_cast<double>(env.hard_core_count()) / n;
  EXPECT_LE(std::abs(frac - 0.5), 3.0 * std::sqrt(0.25 / 1e5));
}

TEST(SampleEnvironment, SupportOfWeibullAndFrechet) {
  const auto w = sample_environment(TailFamily::weibull(2), 2, 30, 3);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_GT(w.v(i), 0.0);
  const auto f = sample_environment(TailFamily::frechet(1), 2, 30, 3);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(f.v(i), 0.0);
}

TEST(SampleEnvironment, RejectsBadInput) {
  EXPECT_THROW(sample_environment(TailFamily::weibull(2), 1, -1, 0), std::invalid_argument);
  EXPECT_THROW(sample_environment(TailFamily::weibull(2), 1, 1, 0, -0.5), std::invalid_argument);
}

TEST(SampleEnvironment, EmpiricalSurvivalWithinFourSigma) {
  struct Case {
    TailFamily f;
    std::vector<double> xs;
  };
  const std::vector<Case> cases{
      {TailFamily::weibull(2), {0.2, 0.5, 1.0, 1.5, 2.0}},
      {TailFamily::double_exp(1), {-2.0, -0.5, 0.0, 0.5, 1.2}},
      {TailFamily::squared_double_exp(), {0.0, 0.3, 0.6, 0.9, 1.2}},
      {TailFamily::frechet(1), {-3.0, -1.0, -0.5, -0.25, -0.1}},
      {TailFamily::hard_core(0.3), {-1.0, -1e-9, 0.0, 0.5, 1.0}},
  };
  for (const auto& c : cases) {
    const auto env = sample_environment(c.f, 1, 500000, 11);
    const double n = static_cast<double>(env.size());
    for (double x : c.xs) {
      std::size_t above = 0;
      for (std::size_t i = 0; i < env.size(); ++i) above += env.v(i) > x;
      const double p = tail_survival(c.f, x);
      const double se = std::sqrt(std::max(p * (1.0 - p), 1e-300) / n);
      EXPECT_LE(std::abs(above / n - p), 4.0 * se + 1e-15) << c.f.name() << " x=" << x;
    }
  }
}

TEST(SampleEnvironment, SeedDeterminism) {
  const auto a = sample_environment(TailFamily::double_exp(1), 2, 10, 99);
  const auto b = sample_environment(TailFamily::double_exp(1), 2, 10, 99);
  EXPECT_EQ(a, b);
  EXPECT_EQ(csv_of(a), csv_of(b));
  const auto c = sample_environment(TailFamily::double_exp(1), 2, 10, 100);
  EXPECT_NE(csv_of(a), csv_of(c));
}

TEST(SampleEnvironment, NestedWindowsShareSites) {
  const auto small = sample_environment(TailFamily::weibull(1.5), 2, 3, 5);
  const auto big = sample_environment(TailFamily::weibull(1.5), 2, 9, 5);
  for (std::size_t i = 0; i < small.size(); ++i) {
    const Site s = small.window().site(i);
    EXPECT_EQ(small.v(i), big.v(s));
  }
  EXPECT_EQ(restrict_environment(big, small.window()), small);
}

TEST(SampleEnvironment, BaselineDeathLeavesPotential) {
  const auto a = sample_environment(TailFamily::double_exp(1), 1, 20, 4);
  const auto b = sample_environment(TailFamily::double_exp(1), 1, 20, 4, 0.75);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a.v(i), b.v(i), 1e-14);
    EXPECT_NEAR(b.v_minus(i), a.v_minus(i) + 0.75, 1e-14);
    EXPECT_NEAR(b.v_plus(i), a.v_plus(i) + 0.75, 1e-14);
  }
}

TEST(EffectivePotential, PointwiseDifference) {
  const Box w = Box::centered(1, 1);
  const Environment env(w, {1.0, 0.0, 0.0}, {3.0, 0.0, 0.0}, {0, 1, 0});
  const auto ep = effective_potential(env);
  EXPECT_EQ(ep.v[0], 2.0);
  EXPECT_EQ(ep.v[1], -INFINITY);
  EXPECT_EQ(ep.v[2], 0.0);
  EXPECT_EQ(env.hard_core_count(), 1u);
}

TEST(EffectivePotential, HardCoreSetMatchesFlags) {
  const auto env = sample_environment(TailFamily::hard_core(0.4), 2, 8, 1);
  const auto ep = effective_potential(env);
  for (std::size_t i = 0; i < env.size(); ++i)
    EXPECT_EQ(ep.v[i] == -INFINITY, env.hard_core(i));
}

TEST(Environment, RejectsInvalidRates) {
  const Box w = Box::centered(1, 0);
  EXPECT_THROW(Environment(w, {0.0}, {-1.0}, {0}), std::invalid_argument);
  EXPECT_THROW(Environment(w, {INFINITY}, {0.0}, {0}), std::invalid_argument);
  EXPECT_THROW(Environment(w, {0.0}, {INFINITY}, {0}), std::invalid_argument);
  EXPECT_THROW(Environment(w, {0.0, 1.0}, {0.0}, {0}), std::invalid_argument);
}

TEST(EnvironmentIO, CsvJsonRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "brwre_env_io";
  std::filesystem::create_directories(dir);
  const auto env = sample_environment(TailFamily::hard_core(0.3), 2, 4, 17);
  save_environment(env, dir / "env.csv", dir / "env.json");
  const auto back = load_environment(dir / "env.csv", dir / "env.json");
  EXPECT_EQ(back, env);

  std::ifstream in(dir / "env.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x0,x1,v_minus,v_plus,hardcore");
  const auto json = environment_header_json(env);
  EXPECT_NE(json.find("\"family\": \"hard_core\""), std::string::npos);
  EXPECT_NE(json.find("\"seed\": 17"), std::string::npos);
  EXPECT_NE(json.find("\"radius\": 4"), std::string::npos);

  const auto w = sample_environment(TailFamily::weibull(2), 1, 30, 2);
  save_environment(w, dir / "w.csv", dir / "w.json");
  EXPECT_EQ(load_environment(dir / "w.csv", dir / "w.json"), w);
  std::filesystem::remove_all(dir);
}
