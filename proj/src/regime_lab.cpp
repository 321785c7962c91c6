#include "brwre/regime_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "brwre/environment.hpp"
#include "brwre/log_math.hpp"
#include "brwre/pam_solver.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

SiteLaw site_law(const TailFamily& family) {
  SiteLaw law;
  law.name = family.name();
  law.quantile = [family](double level) { return quantile_at_level(family, level); };
  law.H = [family](double t) { return cumulant_H(family, t); };
  law.truncated_log_moment = [family](double t, double lmax) { return truncated_log_moment(family, t, lmax); };
  return law;
}

SiteLaw two_point_law(double c, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("two-point law needs 0 < p < 1");
  const double cut = -std::log(p);
  SiteLaw law;
  std::ostringstream name;
  name << "two_point(c=" << c << ",p=" << p << ")";
  law.name = name.str();
  law.quantile = [c, cut](double level) { return level > cut ? c : 0.0; };
  law.H = [c, p](double t) { return std::log((1.0 - p) + p * std::exp(c * t)); };
  law.truncated_log_moment = [c, cut](double t, double lmax) {
    double mass = -std::expm1(-std::min(lmax, cut));
    if (lmax > cut) mass += std::exp(c * t) * (std::exp(-cut) - std::exp(-lmax));
    return std::log(mass);
  };
  return law;
}

ScheduledL schedule_L(const ScheduleRule& rule, const TailFamily& family, int dim, double t,
                      std::size_t t_index, long long max_L) {
  double log_L = 0.0;
  switch (rule.kind) {
    case ScheduleKind::Explicit:
      if (t_index >= rule.explicit_L.size()) throw std::invalid_argument("explicit schedule has no entry for this time");
      if (rule.explicit_L[t_index] < 1) throw std::invalid_argument("L must be >= 1");
      log_L = std::log(static_cast<double>(rule.explicit_L[t_index]));
      break;
    case ScheduleKind::GammaJ:
      if (!(rule.gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
      log_L = rule.gamma == 0.0 ? 0.0 : rule.gamma * growth_J(family, dim, t) / dim;
      break;
    case ScheduleKind::FEpsilon: {
      auto it = std::find_if(rule.f_table.begin(), rule.f_table.end(),
                             [t](const auto& row) { return std::abs(row.first - t) <= 1e-12 * std::max(1.0, t); });
      if (it == rule.f_table.end()) throw std::invalid_argument("F_eps table has no entry for this time");
      log_L = std::max(0.0, it->second / dim);
      break;
    }
  }
  ScheduledL out;
  if (rule.kind == ScheduleKind::Explicit) {
    out.L = rule.explicit_L[t_index];
  } else {
    const double L = std::ceil(std::exp(log_L) * (1.0 - 1e-15));
    if (!(L <= static_cast<double>(max_L))) {
      std::ostringstream msg;
      msg << "schedule needs L = " << L << " (log L = " << log_L << "), above the budget " << max_L;
      throw ScheduleOverflow(msg.str(), L);
    }
    out.L = std::max(1LL, static_cast<long long>(L));
  }
  if (out.L > max_L) throw ScheduleOverflow("explicit L above the budget", static_cast<double>(out.L));
  const double J = growth_J(family, dim, t);
  out.gamma_equivalent = J > 0.0 ? dim * std::log(static_cast<double>(out.L)) / J : kNaN;
  return out;
}

std::string classification_name(Classification c) {
  switch (c) {
    case Classification::Annealed: return "annealed";
    case Classification::NonAnnealed: return "non-annealed";
    case Classification::Gaussian: return "gaussian";
    case Classification::NonGaussian: return "non-gaussian";
    case Classification::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Kappa0Reference kappa0_reference(const SiteLaw& law, double t) {
  const double h1 = law.H(t), h2 = law.H(2.0 * t);
  return {h1, std::exp(2.0 * h1) * std::expm1(h2 - 2.0 * h1)};
}

namespace {

double sites_in_box(long long L, int dim) {
  double n = 1.0;
  for (int k = 0; k < dim; ++k) n *= 2.0 * static_cast<double>(L) + 1.0;
  return n;
}

/// log of sum_{i<N} e^{t v_i} with every level drawn.
double direct_log_sum(const SiteLaw& law, double t, long long n, Rng& rng) {
  LogMeanAccumulator acc;
  for (long long i = 0; i < n; ++i) {
    const double v = law.quantile(rng.exponential());
    acc.add(v == kNegInf ? kNegInf : t * v);
  }
  const double lm = acc.log_mean();
  return lm == kNegInf ? kNegInf : lm + std::log(static_cast<double>(n));
}

/// Top k order statistics of the levels exactly (Renyi), the remaining n - k
/// terms as a Gaussian with the moments of the law cut at the k-th level.
double hybrid_log_sum(const SiteLaw& law, double t, double n, int k, Rng& rng) {
  const double g_top = rng.gamma(static_cast<double>(k));
  const double g_rest = rng.gamma(n - k + 1.0);
  const double cut = std::log(g_top + g_rest) - std::log(g_top);

  std::vector<double> top;
  top.reserve(static_cast<std::size_t>(k));
  auto push = [&](double level) {
    const double v = law.quantile(level);
    top.push_back(v == kNegInf ? kNegInf : t * v);
  };
  push(cut);
  for (int j = 1; j < k; ++j) push(cut + rng.exponential());
  const double log_top = log_sum_exp(top);

  const double bulk_n = n - k;
  const double log_p = std::log(-std::expm1(-cut));
  const double log_mu = law.truncated_log_moment(t, cut) - log_p;
  const double log_m2 = law.truncated_log_moment(2.0 * t, cut) - log_p;
  const double rel_var = std::max(0.0, std::expm1(log_m2 - 2.0 * log_mu));
  const double z = rng.normal();
  const double factor = 1.0 + std::sqrt(rel_var / bulk_n) * z;
  const double log_bulk = factor > 0.0 ? std::log(bulk_n) + log_mu + std::log(factor) : kNegInf;
  return log_add_exp(log_top, log_bulk);
}

unsigned budget(unsigned threads) { return threads ? threads : default_thread_budget(); }

}  // namespace

std::vector<double> replica_log_averages(const RegimeConfig& cfg, double t, long long L, std::string* sampler) {
  if (cfg.replicas < 1) throw std::invalid_argument("need at least one replica");
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(cfg.replicas));
  const double n = sites_in_box(L, cfg.dim);

  if (cfg.kappa == 0.0) {
    const SiteLaw law = cfg.law_override ? *cfg.law_override : site_law(cfg.family);
    const bool direct = n <= static_cast<double>(cfg.direct_max_sites);
    if (!direct && n <= cfg.top_k) throw std::invalid_argument("top_k must be below the direct-sampling limit");
    if (sampler) *sampler = direct ? "direct" : "hybrid";
    parallel_for(out.size(), budget(cfg.threads), [&](std::size_t r) {
      Rng rng(derive_seed(cfg.seed, "regime-replica", r));
      const double ls = direct ? direct_log_sum(law, t, static_cast<long long>(n), rng)
                               : hybrid_log_sum(law, t, n, cfg.top_k, rng);
      out[r] = ls - std::log(n);
    });
    return out;
  }

  if (cfg.law_override) throw std::invalid_argument("a law override needs kappa = 0");
  if (sampler) *sampler = "solver";
  const int R = std::max(1, truncation_radius(cfg.dim, cfg.kappa, t, cfg.tol));
  if (L + R > 1'000'000) throw std::invalid_argument("window too large for the kappa > 0 pipeline");
  parallel_for(out.size(), budget(cfg.threads), [&](std::size_t r) {
    const auto env = sample_environment(cfg.family, cfg.dim, static_cast<int>(L) + R,
                                        derive_seed(cfg.seed, "regime-replica", r));
    out[r] = empirical_average(env, static_cast<int>(L), cfg.kappa, t, cfg.tol).log_value;
  });
  return out;
}

namespace {

struct Prepared {
  RegimeVerdict v;
  std::vector<double> log_m;
};

Prepared prepare(const RegimeConfig& cfg, const std::string& experiment, double t, std::size_t t_index,
                 const ScheduleRule& rule) {
  if (cfg.replicas < 100) throw std::invalid_argument("regime experiments need at least 100 replicas");
  const long long max_L = cfg.kappa > 0.0 ? std::min<long long>(cfg.max_L, 2000) : cfg.max_L;
  const auto sched = schedule_L(rule, cfg.family, cfg.dim, t, t_index, max_L);
  const auto table = transition_exponents(cfg.family, cfg.dim);
  Prepared p;
  RegimeVerdict& v = p.v;
  v.experiment = experiment;
  v.family = cfg.law_override ? cfg.law_override->name : cfg.family.name();
  v.kappa = cfg.kappa;
  v.dim = cfg.dim;
  v.t = t;
  v.L = sched.L;
  v.gamma = rule.kind == ScheduleKind::GammaJ ? rule.gamma : sched.gamma_equivalent;
  v.gamma1 = table.gamma1;
  v.gamma2 = table.gamma2;
  v.replicas = cfg.replicas;
  p.log_m = replica_log_averages(cfg, t, sched.L, &v.sampler);

  if (cfg.kappa == 0.0) {
    const SiteLaw law = cfg.law_override ? *cfg.law_override : site_law(cfg.family);
    v.log_reference = law.H(t);
  } else {
    const double h = cumulant_H(cfg.family, t);
    v.reference_halfwidth = cfg.dim * cfg.kappa * t;
    v.log_reference = h - v.reference_halfwidth;
  }

  std::vector<double> ratio(p.log_m.size());
  long long in_band = 0, below_half = 0;
  for (std::size_t r = 0; r < ratio.size(); ++r) {
    ratio[r] = std::exp(p.log_m[r] - v.log_reference);
    in_band += std::abs(ratio[r] - 1.0) <= cfg.thresholds.band;
    below_half += ratio[r] < 0.5;
  }
  const auto m = sample_moments(ratio);
  v.ratio_mean = m.mean;
  v.ratio_sd = m.sd();
  std::sort(ratio.begin(), ratio.end());
  v.ratio_q05 = quantile_sorted(ratio, 0.05);
  v.ratio_q50 = quantile_sorted(ratio, 0.5);
  v.ratio_q95 = quantile_sorted(ratio, 0.95);
  v.frac_in_band = static_cast<double>(in_band) / static_cast<double>(ratio.size());
  v.frac_below_half = static_cast<double>(below_half) / static_cast<double>(ratio.size());
  return p;
}

ScheduleRule gamma_rule(double gamma) {
  ScheduleRule r;
  r.kind = ScheduleKind::GammaJ;
  r.gamma = gamma;
  return r;
}

}  // namespace

std::vector<RegimeVerdict> lln_experiment(const RegimeConfig& cfg) {
  std::vector<RegimeVerdict> out;
  for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
    auto p = prepare(cfg, "lln", cfg.t_grid[k], k, cfg.schedule);
    auto& v = p.v;
    if (v.frac_in_band >= cfg.thresholds.fraction) v.classification = Classification::Annealed;
    else if (v.frac_below_half >= cfg.thresholds.fraction) v.classification = Classification::NonAnnealed;
    const Classification expected = v.gamma > v.gamma1 ? Classification::Annealed : Classification::NonAnnealed;
    v.passed = v.classification == expected;
    out.push_back(v);
  }
  return out;
}

std::vector<RegimeVerdict> clt_experiment(const RegimeConfig& cfg) {
  std::vector<RegimeVerdict> out;
  for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
    const double t = cfg.t_grid[k];
    auto p = prepare(cfg, "clt", t, k, cfg.schedule);
    auto& v = p.v;
    const double n = sites_in_box(v.L, cfg.dim);
    std::vector<double> z(p.log_m.size());
    if (cfg.kappa == 0.0) {
      const SiteLaw law = cfg.law_override ? *cfg.law_override : site_law(cfg.family);
      const auto ref = kappa0_reference(law, t);
      // (m^L - e^H) sqrt(N) / sd with sd^2 = e^{2H} (e^{H(2t) - 2H} - 1)
      const double scale = std::sqrt(n) * std::exp(ref.log_mean) / std::sqrt(ref.site_variance);
      for (std::size_t r = 0; r < z.size(); ++r) z[r] = std::expm1(p.log_m[r] - ref.log_mean) * scale;
    } else {
      std::vector<double> m(p.log_m.size());
      for (std::size_t r = 0; r < m.size(); ++r) m[r] = std::exp(p.log_m[r] - v.log_reference);
      const auto mm = sample_moments(m);
      for (std::size_t r = 0; r < z.size(); ++r) z[r] = mm.sd() > 0.0 ? (m[r] - mm.mean) / mm.sd() : 0.0;
    }
    const auto zm = sample_moments(z);
    v.stat_skew = zm.skewness;
    v.stat_exkurt = zm.excess_kurtosis;
    v.ks_p = zm.variance > 0.0 ? ks_test_normal(z).p_value : 0.0;
    std::vector<double> absz(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) absz[r] = std::abs(z[r]);
    v.median_abs_stat = median(absz);
    v.degenerate = cfg.kappa == 0.0 && v.median_abs_stat <= cfg.thresholds.degenerate_median;
    const auto& th = cfg.thresholds;
    if (std::abs(v.stat_skew) <= th.max_abs_skew && std::abs(v.stat_exkurt) <= th.max_abs_exkurt && v.ks_p >= th.min_ks_p)
      v.classification = Classification::Gaussian;
    else if (v.degenerate)
      v.classification = Classification::NonGaussian;
    const Classification expected = v.gamma > v.gamma2 ? Classification::Gaussian : Classification::NonGaussian;
    v.passed = v.classification == expected;
    out.push_back(v);
  }
  return out;
}

std::vector<RegimeVerdict> critical_experiment(const RegimeConfig& cfg, double gamma, double delta) {
  const auto table = transition_exponents(cfg.family, cfg.dim);
  if (!(gamma > 0.0 && gamma < table.gamma1)) throw std::invalid_argument("critical experiment needs 0 < gamma < gamma1");
  const double a = critical_a(cfg.family, cfg.dim, gamma);
  std::vector<RegimeVerdict> out;
  for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
    const double t = cfg.t_grid[k];
    auto p = prepare(cfg, "critical", t, k, gamma_rule(gamma));
    auto& v = p.v;
    v.a_gamma = a;
    v.delta = delta;
    switch (cfg.family.kind()) {
      case TailKind::Weibull:
        v.log_normalizer = (a + delta) * cumulant_H(cfg.family, t);
        break;
      case TailKind::DoubleExp:
      case TailKind::SquaredDoubleExp:
        if (!(a + delta > 0.0)) throw std::invalid_argument("a(gamma) + delta must be > 0");
        v.log_normalizer = cumulant_H(cfg.family, (a + delta) * t) / (a + delta);
        break;
      case TailKind::Frechet:
        v.log_normalizer = -(a - delta) * growth_J(cfg.family, cfg.dim, t);
        break;
      case TailKind::HardCore:
        throw std::invalid_argument("no critical function for the hard-core family");
    }
    long long below = 0;
    for (double lm : p.log_m) below += lm < v.log_normalizer;
    v.frac_below_normalizer = static_cast<double>(below) / static_cast<double>(p.log_m.size());
    // delta > 0 is the theorem's direction; delta <= 0 probes sharpness
    v.passed = delta > 0.0 ? v.frac_below_normalizer >= cfg.thresholds.fraction : v.frac_below_normalizer < 0.5;
    out.push_back(v);
  }
  return out;
}

}  // namespace brwre
