#include "brwre/moment_stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "brwre/log_math.hpp"
#include "brwre/pam_solver.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/tail_analytics.hpp"

namespace brwre {

namespace {

unsigned budget(unsigned threads) { return threads ? threads : default_thread_budget(); }

std::uint64_t replica_seed(std::uint64_t seed, int r) {
  return derive_seed(seed, "replica", static_cast<std::uint64_t>(r));
}

double ipow(double b, int d) {
  double p = 1.0;
  for (int k = 0; k < d; ++k) p *= b;
  return p;
}

/// Sample covariance with the standard error of the mean of centred products.
void covariance(const std::vector<double>& a, const std::vector<double>& b, double& cov, double& se,
                double& corr) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  std::vector<double> prod(n);
  double va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prod[i] = (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  const auto m = sample_moments(prod);
  cov = m.mean * static_cast<double>(n) / static_cast<double>(n - 1);
  se = m.stderr_mean();
  corr = (va > 0.0 && vb > 0.0) ? m.mean * static_cast<double>(n) / std::sqrt(va * vb) : 0.0;
}

double sample_variance(const std::vector<double>& xs) { return sample_moments(xs).variance; }

}  // namespace

int scale_radius(double kappa, double t, double a) {
  if (!(a > 1.0)) throw std::invalid_argument("scale exponent a must exceed 1");
  const double kt = kappa * t;
  if (kt <= 0.0) return 0;
  return static_cast<int>(std::ceil(std::pow(kt, a) - 1e-12));
}

ReplicaMoments replica_log_moments(const TailFamily& family, double kappa, int dim,
                                   const std::vector<double>& t_grid, int replicas, double tol,
                                   std::uint64_t seed, unsigned threads) {
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  ReplicaMoments out;
  out.t_grid = t_grid;
  out.log_m.assign(static_cast<std::size_t>(replicas), std::vector<double>(t_grid.size()));
  double t_max = 0.0;
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("times must be >= 0");
    t_max = std::max(t_max, t);
  }
  if (kappa > 0.0) out.window_radius = std::max(1, truncation_radius(dim, kappa, t_max, tol));
  parallel_for(static_cast<std::size_t>(replicas), budget(threads), [&](std::size_t r) {
    auto& row = out.log_m[r];
    const std::uint64_t s = replica_seed(seed, static_cast<int>(r));
    if (kappa == 0.0) {
      const double v = sample_site_potential(family, Site{}, dim, s);
      for (std::size_t k = 0; k < t_grid.size(); ++k)
        row[k] = t_grid[k] == 0.0 ? 0.0 : (v == kNegInf ? kNegInf : v * t_grid[k]);
      return;
    }
    const auto env = sample_environment(family, dim, out.window_radius, s);
    for (std::size_t k = 0; k < t_grid.size(); ++k)
      row[k] = solve_untruncated(env, Site{}, kappa, t_grid[k], tol).log_value();
  });
  return out;
}

bool AnnealedEstimate::in_sandwich() const {
  const double hw = ci.half_width();
  return h1_hat >= h_lower - hw && h1_hat <= h_upper + hw;
}

std::vector<AnnealedEstimate> estimate_H1(const TailFamily& family, double kappa, int dim,
                                          const std::vector<double>& t_grid, int replicas,
                                          double tol, std::uint64_t seed, unsigned threads,
                                          double level) {
  if (replicas < 50) throw std::invalid_argument("estimate_H1 needs at least 50 replicas");
  const auto rm = replica_log_moments(family, kappa, dim, t_grid, replicas, tol, seed, threads);
  std::vector<AnnealedEstimate> out;
  std::vector<double> col(static_cast<std::size_t>(replicas));
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    for (std::size_t r = 0; r < col.size(); ++r) col[r] = rm.log_m[r][k];
    AnnealedEstimate e;
    e.t = t_grid[k];
    e.replicas = replicas;
    e.h1_hat = log_mean_exp(col);
    e.ci = t_grid[k] == 0.0 ? Interval{0.0, 0.0}
                            : bootstrap_log_mean(col, kBootstrapResamples, level, derive_seed(seed, "h1-boot", k));
    e.h_upper = cumulant_H(family, e.t);
    e.h_lower = e.h_upper - 2.0 * dim * kappa * e.t;
    out.push_back(e);
  }
  return out;
}

std::vector<FThetaRow> estimate_F_theta(const TailFamily& family, double kappa, int dim,
                                        const std::vector<double>& theta_grid,
                                        const std::vector<double>& t_grid, int replicas,
                                        std::uint64_t seed, double tol, unsigned threads) {
  std::vector<double> times;
  for (double th : theta_grid) {
    if (!(th > -1.0) || th == 0.0) throw std::invalid_argument("theta must be > -1 and nonzero");
    for (double t : t_grid) {
      times.push_back(t);
      times.push_back((1.0 + th) * t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const auto rm = replica_log_moments(family, kappa, dim, times, replicas, tol, seed, threads);
  auto column = [&](double t) {
    const auto k = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
    std::vector<double> c(rm.log_m.size());
    for (std::size_t r = 0; r < c.size(); ++r) c[r] = rm.log_m[r][k];
    return c;
  };
  std::vector<FThetaRow> out;
  std::uint64_t row_index = 0;
  for (double th : theta_grid) {
    for (double t : t_grid) {
      const auto lo = column(t);
      const auto hi = column((1.0 + th) * t);
      FThetaRow row;
      row.theta = th;
      row.t = t;
      row.f_hat = (log_mean_exp(hi) - (1.0 + th) * log_mean_exp(lo)) / th;
      double shift_lo = kNegInf, shift_hi = kNegInf;
      for (double v : lo) shift_lo = std::max(shift_lo, v);
      for (double v : hi) shift_hi = std::max(shift_hi, v);
      std::vector<double> slo(lo.size()), shi(hi.size());
      for (std::size_t r = 0; r < lo.size(); ++r) {
        slo[r] = std::exp(lo[r] - shift_lo);
        shi[r] = std::exp(hi[r] - shift_hi);
      }
      row.ci = bootstrap_percentile(lo.size(), kBootstrapResamples, 0.95, derive_seed(seed, "ftheta-boot", row_index++),
                                    [&](const std::vector<int>& mult) {
                                      double a = 0.0, b = 0.0;
                                      for (std::size_t r = 0; r < mult.size(); ++r) {
                                        a += mult[r] * slo[r];
                                        b += mult[r] * shi[r];
                                      }
                                      const double n = static_cast<double>(mult.size());
                                      const double h_lo = shift_lo + std::log(a / n);
                                      const double h_hi = shift_hi + std::log(b / n);
                                      return (h_hi - (1.0 + th) * h_lo) / th;
                                    });
      row.g_exact = cumulant_exponent_G(family, th, t);
      out.push_back(row);
    }
  }
  return out;
}

std::vector<CorrelationRow> correlation_profile(const TailFamily& family, double kappa, int dim,
                                                double t, double a, const std::vector<Site>& ys,
                                                int replicas, std::uint64_t seed, unsigned threads) {
  if (replicas < 3) throw std::invalid_argument("correlation_profile needs replicas >= 3");
  const int s = scale_radius(kappa, t, a);
  int reach = 0;
  for (const auto& y : ys) reach = std::max(reach, sup_distance(y, Site{}, dim));
  const int untrunc = kappa > 0.0 ? truncation_radius(dim, kappa, t, 1e-8) : 0;
  const int window = reach + std::max(s, untrunc);
  const std::size_t ny = ys.size();
  // per replica: m(0), m(y_k), m~(0), m~(y_k)
  std::vector<std::vector<double>> full(static_cast<std::size_t>(replicas), std::vector<double>(ny + 1));
  std::vector<std::vector<double>> trunc(static_cast<std::size_t>(replicas), std::vector<double>(ny + 1));
  parallel_for(static_cast<std::size_t>(replicas), budget(threads), [&](std::size_t r) {
    const auto env = sample_environment(family, dim, window, replica_seed(seed, static_cast<int>(r)));
    for (std::size_t k = 0; k <= ny; ++k) {
      const Site x = k == 0 ? Site{} : ys[k - 1];
      full[r][k] = std::exp(solve_untruncated(env, x, kappa, t, 1e-8).log_value());
      trunc[r][k] = std::exp(solve_truncated(env, Box(dim, x, s), kappa, t).log_value(x));
    }
  });
  auto column = [&](const std::vector<std::vector<double>>& m, std::size_t k) {
    std::vector<double> c(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) c[r] = m[r][k];
    return c;
  };
  const auto f0 = column(full, 0);
  const auto t0 = column(trunc, 0);
  std::vector<CorrelationRow> out;
  for (std::size_t k = 1; k <= ny; ++k) {
    CorrelationRow row;
    row.y = ys[k - 1];
    covariance(f0, column(full, k), row.cov, row.cov_stderr, row.corr);
    covariance(t0, column(trunc, k), row.cov_trunc, row.cov_trunc_stderr, row.corr_trunc);
    row.disjoint_windows = sup_distance(row.y, Site{}, dim) > 2 * s;
    if (kappa == 0.0) {
      row.exact = row.y == Site{} ? std::exp(cumulant_H(family, 2 * t)) - std::exp(2 * cumulant_H(family, t)) : 0.0;
    }
    out.push_back(row);
  }
  return out;
}

// ---- partitions ----

std::size_t PartitionPlan::box_count() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(q);
  return n;
}

std::vector<int> PartitionPlan::box_index(std::size_t k) const {
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (int c = dim - 1; c >= 0; --c) {
    idx[static_cast<std::size_t>(c)] = static_cast<int>(k % static_cast<std::size_t>(q));
    k /= static_cast<std::size_t>(q);
  }
  return idx;
}

unsigned PartitionPlan::parity_class(std::size_t k) const {
  const auto idx = box_index(k);
  unsigned cls = 0;
  for (int c = 0; c < dim; ++c)
    if ((idx[static_cast<std::size_t>(c)] + 1) % 2 == 0) cls |= 1u << c;
  return cls;
}

std::size_t PartitionPlan::box_of(const Site& s) const {
  std::size_t k = 0;
  for (int c = 0; c < dim; ++c) {
    int i = 0;
    while (i < q && intervals[static_cast<std::size_t>(i)].hi < s[c]) ++i;
    if (i == q || s[c] < intervals[static_cast<std::size_t>(i)].lo) throw std::out_of_range("site outside Lambda_L");
    k = k * static_cast<std::size_t>(q) + static_cast<std::size_t>(i);
  }
  return k;
}

std::string PartitionPlan::to_json() const {
  nlohmann::ordered_json j;
  j["L"] = L;
  j["L_prime"] = L_prime;
  j["r"] = r;
  j["d"] = dim;
  j["q"] = q;
  j["q_bar"] = q_bar;
  auto ivs = nlohmann::ordered_json::array();
  for (const auto& iv : intervals) ivs.push_back({iv.lo, iv.hi});
  j["intervals"] = ivs;
  auto mains = nlohmann::ordered_json::array();
  for (const auto& iv : main_intervals) mains.push_back(iv.size() ? nlohmann::ordered_json{iv.lo, iv.hi} : nlohmann::ordered_json::array());
  j["main_intervals"] = mains;
  std::vector<long long> class_sizes(std::size_t{1} << dim, 0);
  for (std::size_t k = 0; k < box_count(); ++k) ++class_sizes[parity_class(k)];
  j["parity_class_sizes"] = class_sizes;
  j["strip_size"] = strip_size;
  j["strip_fraction"] = strip_fraction;
  j["strip_bound"] = strip_bound;
  j["checks"] = {{"tiling", checks.tiling},
                 {"box_sizes", checks.box_sizes},
                 {"parity_separation", checks.parity_separation},
                 {"strip_fraction", checks.strip_fraction}};
  return j.dump(2);
}

PartitionPlan build_partitions(int L, int L_prime, int r, int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(r >= 0 && r <= L_prime && L_prime <= L && L_prime >= 1))
    throw std::invalid_argument("scales must satisfy r <= L' <= L");
  PartitionPlan p;
  p.L = L;
  p.L_prime = L_prime;
  p.r = r;
  p.dim = dim;
  const int side = 2 * L + 1;
  p.q = side / L_prime;
  p.q_bar = side % L_prime;
  if (p.q_bar >= p.q) {
    std::ostringstream msg;
    msg << "2L+1 = " << side << " = " << p.q << "*" << L_prime << " + " << p.q_bar
        << " leaves a remainder >= q; choose L' with (2L+1) mod L' < (2L+1) / L'";
    throw std::invalid_argument(msg.str());
  }
  int start = -L;
  for (int i = 0; i < p.q; ++i) {
    const int extra = i < p.q_bar ? 1 : 0;
    const int len = L_prime + extra;
    p.intervals.push_back({start, start + len - 1});
    p.main_intervals.push_back({start + r, start + len - 1 - (r + extra)});
    start += len;
  }
  const long long main_side = std::max(0, L_prime - 2 * r);
  long long main_total = 1, total = 1;
  for (int k = 0; k < dim; ++k) {
    main_total *= main_side * p.q;
    total *= side;
  }
  p.strip_size = total - main_total;
  p.strip_fraction = static_cast<double>(p.strip_size) / static_cast<double>(total);
  p.strip_bound = (ipow(L_prime + 1.0, dim) - ipow(static_cast<double>(main_side), dim)) / ipow(L_prime, dim);
  p.checks = verify_partitions(p);
  return p;
}

PartitionChecks verify_partitions(const PartitionPlan& p) {
  PartitionChecks c;
  const int d = p.dim;
  const Box big = Box::centered(d, p.L);

  // tiling: every site of Lambda_L lies in exactly one partition box
  std::vector<long long> seen(p.box_count(), 0);
  bool tiles = true;
  for (int i = 0; i < p.q; ++i) {
    const auto& iv = p.intervals[static_cast<std::size_t>(i)];
    if (iv.size() <= 0) tiles = false;
    if (i > 0 && iv.lo != p.intervals[static_cast<std::size_t>(i - 1)].hi + 1) tiles = false;
  }
  if (p.intervals.empty() || p.intervals.front().lo != -p.L || p.intervals.back().hi != p.L) tiles = false;
  std::vector<long long> box_sizes(p.box_count(), 0);
  if (tiles) {
    for (std::size_t i = 0; i < big.size(); ++i) {
      const Site s = big.site(i);
      int hits = 0;
      std::size_t owner = 0;
      for (std::size_t k = 0; k < p.box_count(); ++k) {
        const auto idx = p.box_index(k);
        bool in = true;
        for (int a = 0; a < d && in; ++a) {
          const auto& iv = p.intervals[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
          in = s[a] >= iv.lo && s[a] <= iv.hi;
        }
        if (in) {
          ++hits;
          owner = k;
        }
      }
      if (hits != 1) tiles = false;
      else ++box_sizes[owner];
    }
  }
  c.tiling = tiles;

  c.box_sizes = tiles;
  const double lo = ipow(p.L_prime, d), hi = ipow(p.L_prime + 1.0, d);
  for (long long n : box_sizes)
    if (static_cast<double>(n) < lo || static_cast<double>(n) > hi) c.box_sizes = false;

  // sup-norm gap between two boxes is the largest coordinate gap
  auto gap = [&](int i, int j) {
    if (i == j) return 0;
    const auto& a = p.intervals[static_cast<std::size_t>(std::min(i, j))];
    const auto& b = p.intervals[static_cast<std::size_t>(std::max(i, j))];
    return b.lo - a.hi;
  };
  c.parity_separation = true;
  for (std::size_t k = 0; k < p.box_count(); ++k) {
    for (std::size_t m = k + 1; m < p.box_count(); ++m) {
      if (p.parity_class(k) != p.parity_class(m)) continue;
      const auto ik = p.box_index(k), im = p.box_index(m);
      int dist = 0;
      for (int a = 0; a < d; ++a) dist = std::max(dist, gap(ik[static_cast<std::size_t>(a)], im[static_cast<std::size_t>(a)]));
      if (dist < p.L_prime) c.parity_separation = false;
    }
  }

  // strip set counted site by site against the main boxes
  long long strip = 0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    const Site s = big.site(i);
    bool in_main = true;
    for (int a = 0; a < d && in_main; ++a) {
      bool any = false;
      for (const auto& iv : p.main_intervals) any = any || (s[a] >= iv.lo && s[a] <= iv.hi);
      in_main = any;
    }
    if (!in_main) ++strip;
  }
  for (std::size_t i = 0; i < p.main_intervals.size(); ++i) {
    const auto& J = p.main_intervals[i];
    const auto& I = p.intervals[i];
    if (J.size() > 0 && (J.lo - I.lo < p.r || I.hi - J.hi < p.r)) strip = -1;
  }
  c.strip_fraction = strip == p.strip_size &&
                     p.strip_fraction <= p.strip_bound + 1e-12;
  return c;
}

// ---- block variance ----

BlockVarianceReport block_variance(const EnvironmentMaker& make_env, double kappa, int dim, double t,
                                   int L, double a, int replicas, unsigned threads) {
  if (replicas < 3) throw std::invalid_argument("block_variance needs replicas >= 3");
  BlockVarianceReport rep;
  rep.t = t;
  rep.L = L;
  rep.replicas = replicas;
  rep.scale = scale_radius(kappa, t, a);
  const int s = rep.scale;
  const Box block = Box::centered(dim, L);
  const std::size_t n = block.size();

  std::vector<std::vector<double>> m(static_cast<std::size_t>(replicas), std::vector<double>(n));
  parallel_for(static_cast<std::size_t>(replicas), budget(threads), [&](std::size_t r) {
    const auto env = make_env(static_cast<int>(r), L + s);
    for (std::size_t i = 0; i < n; ++i) {
      const Site x = block.site(i);
      m[r][i] = env.hard_core(x) ? 0.0 : std::exp(solve_truncated(env, Box(dim, x, s), kappa, t).log_value(x));
    }
  });

  std::vector<double> sums(static_cast<std::size_t>(replicas));
  double grand = 0.0;
  for (int r = 0; r < replicas; ++r) {
    double acc = 0.0;
    for (double v : m[static_cast<std::size_t>(r)]) acc += v;
    sums[static_cast<std::size_t>(r)] = acc;
    grand += acc;
  }
  rep.mean_sum = grand / replicas;
  rep.var_sum = sample_variance(sums);

  // c_a(0, y) pooled over sites and replicas; zero beyond |y| > 2s by independence
  const double mu = grand / (static_cast<double>(replicas) * static_cast<double>(n));
  const Box offsets = Box::centered(dim, 2 * s);
  double csum = 0.0;
  for (std::size_t o = 0; o < offsets.size(); ++o) {
    const Site y = offsets.site(o);
    double acc = 0.0;
    long long pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Site x2 = block.site(i);
      for (int k = 0; k < dim; ++k) x2[k] += y[k];
      if (!block.contains(x2)) continue;
      const std::size_t j = block.index(x2);
      for (int r = 0; r < replicas; ++r) acc += (m[static_cast<std::size_t>(r)][i] - mu) * (m[static_cast<std::size_t>(r)][j] - mu);
      pairs += replicas;
    }
    if (pairs > 1) csum += acc / static_cast<double>(pairs - 1);
  }
  rep.var_predicted = static_cast<double>(n) * csum;
  rep.ratio = rep.var_predicted > 0.0 ? rep.var_sum / rep.var_predicted : kNaN;

  // parity classes at scale L' = 2s + 1 where same-class boxes are independent
  const int lp = std::min(L, 2 * s + 1);
  try {
    const auto plan = build_partitions(L, lp, 0, dim);
    const std::size_t classes = std::size_t{1} << dim;
    std::vector<std::vector<double>> class_sums(classes, std::vector<double>(static_cast<std::size_t>(replicas), 0.0));
    std::vector<std::vector<double>> box_sums(plan.box_count(), std::vector<double>(static_cast<std::size_t>(replicas), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = plan.box_of(block.site(i));
      const unsigned cls = plan.parity_class(b);
      for (int r = 0; r < replicas; ++r) {
        class_sums[cls][static_cast<std::size_t>(r)] += m[static_cast<std::size_t>(r)][i];
        box_sums[b][static_cast<std::size_t>(r)] += m[static_cast<std::size_t>(r)][i];
      }
    }
    rep.class_var.assign(classes, 0.0);
    rep.class_box_var_sum.assign(classes, 0.0);
    for (std::size_t k = 0; k < classes; ++k) rep.class_var[k] = sample_variance(class_sums[k]);
    for (std::size_t b = 0; b < plan.box_count(); ++b) rep.class_box_var_sum[plan.parity_class(b)] += sample_variance(box_sums[b]);
  } catch (const std::invalid_argument&) {
    // no admissible parity partition at this (L, L'); the decomposition is left empty
  }
  return rep;
}

BlockVarianceReport block_variance(const TailFamily& family, double kappa, int dim, double t, int L,
                                   double a, int replicas, std::uint64_t seed, unsigned threads) {
  auto rep = block_variance(
      [&](int r, int radius) { return sample_environment(family, dim, radius, replica_seed(seed, r)); },
      kappa, dim, t, L, a, replicas, threads);
  if (kappa == 0.0) {
    rep.var_exact = ipow(2.0 * L + 1.0, dim) *
                    (std::exp(cumulant_H(family, 2 * t)) - std::exp(2 * cumulant_H(family, t)));
  }
  return rep;
}

}  // namespace brwre
