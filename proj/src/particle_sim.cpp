#include "brwre/particle_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "brwre/log_math.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"

namespace brwre {

namespace {

constexpr double kUcl975 = 1.959963984540054;
constexpr long long kRebuildEvery = 1 << 16;

/// Fenwick tree of nonnegative site weights.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0), value_(n, 0.0) {}

  void set(std::size_t i, double w) {
    const double delta = w - value_[i];
    value_[i] = w;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }

  void rebuild() {
    std::fill(tree_.begin(), tree_.end(), 0.0);
    for (std::size_t i = 0; i < value_.size(); ++i) {
      const std::size_t k = i + 1;
      tree_[k] += value_[i];
      const std::size_t parent = k + (k & (~k + 1));
      if (parent < tree_.size()) tree_[parent] += tree_[k];
    }
  }

  double total() const {
    double s = 0.0;
    for (std::size_t k = value_.size(); k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  /// Index i with prefix(i) <= target < prefix(i + 1), skipping zero weights.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    // rounding can land on a zero-weight tail site; walk back to a live one
    std::size_t i = std::min(pos, value_.size() - 1);
    while (value_[i] <= 0.0 && i > 0) --i;
    while (value_[i] <= 0.0 && i + 1 < value_.size()) ++i;
    return i;
  }

 private:
  std::vector<double> tree_;
  std::vector<double> value_;
};

}  // namespace

ParticleRun gillespie_run(const Environment& env, const Box& box, double kappa, double t_end,
                          const Site& x, std::uint64_t seed, bool record_trajectory,
                          long long population_cap) {
  if (!(kappa >= 0.0) || !(t_end >= 0.0)) throw std::invalid_argument("kappa and t_end must be >= 0");
  if (!env.window().contains(box)) throw std::invalid_argument("box does not fit inside the window");
  if (!box.contains(x)) throw std::invalid_argument("start site outside the box");
  if (env.hard_core(x)) throw std::invalid_argument("start site is hard core");

  const int d = box.dim();
  const std::size_t n = box.size();
  std::vector<double> jump_rate(n, 0.0), branch_rate(n, 0.0), death_rate(n, 0.0), site_rate(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Site s = box.site(i);
    if (env.hard_core(s)) continue;
    jump_rate[i] = 2.0 * d * kappa;
    branch_rate[i] = env.v_plus(s);
    death_rate[i] = env.v_minus(s);
    site_rate[i] = jump_rate[i] + branch_rate[i] + death_rate[i];
  }

  ParticleRun run;
  ParticleState& st = run.state;
  st.box = box;
  st.eta.assign(n, 0);
  st.zeta = 1;
  const std::size_t start = box.index(x);
  st.eta[start] = 1;
  Fenwick fw(n);
  fw.set(start, site_rate[start]);
  if (record_trajectory) run.trajectory.push_back({0.0, 1});

  Rng rng(seed);
  long long events = 0;
  auto update = [&](std::size_t i) { fw.set(i, static_cast<double>(st.eta[i]) * site_rate[i]); };

  while (st.zeta > 0) {
    const double total = fw.total();
    if (!(total > 0.0)) break;
    const double dt = rng.exponential() / total;
    if (st.time + dt > t_end) break;
    st.time += dt;

    const std::size_t i = fw.find(rng.uniform() * total);
    const double u = rng.uniform() * site_rate[i];
    if (u < jump_rate[i]) {
      ++st.jump;
      Site y = box.site(i);
      const int dir = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * d)));
      y[dir / 2] += (dir % 2) ? 1 : -1;
      --st.eta[i];
      update(i);
      if (!box.contains(y)) {
        ++st.boundary_kill;
        --st.zeta;
      } else if (env.hard_core(y)) {
        ++st.death;
        ++st.hard_core_kill;
        --st.zeta;
      } else {
        const std::size_t j = box.index(y);
        ++st.eta[j];
        update(j);
      }
    } else if (u < jump_rate[i] + branch_rate[i]) {
      ++st.branch;
      ++st.eta[i];
      ++st.zeta;
      update(i);
    } else {
      ++st.death;
      --st.eta[i];
      --st.zeta;
      update(i);
    }
    if (record_trajectory) run.trajectory.push_back({st.time, st.zeta});
    if (st.zeta > population_cap) {
      run.truncated = true;
      return run;
    }
    if (++events % kRebuildEvery == 0) fw.rebuild();
  }
  st.time = t_end;
  return run;
}

double PopulationEstimate::log_mean() const { return mean > 0.0 ? std::log(mean) : kNegInf; }
double PopulationEstimate::log_stderr() const { return mean > 0.0 ? stderr / mean : kNaN; }

namespace {

struct RunTotals {
  double zeta = 0.0;
  double exits = 0.0;
  bool truncated = false;
};

std::vector<RunTotals> many_runs(const Environment& env, const Box& box, double kappa, double t,
                                 const Site& x, long long n_runs, std::uint64_t seed, unsigned threads,
                                 long long cap) {
  if (n_runs < 1) throw std::invalid_argument("need at least one run");
  std::vector<RunTotals> out(static_cast<std::size_t>(n_runs));
  if (env.hard_core(x)) return out;
  parallel_for(out.size(), threads ? threads : default_thread_budget(), [&](std::size_t r) {
    const auto run = gillespie_run(env, box, kappa, t, x, derive_seed(seed, "particles", r), false, cap);
    out[r] = {static_cast<double>(run.state.zeta), static_cast<double>(run.state.boundary_kill), run.truncated};
  });
  return out;
}

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double v : xs) s += v;
  mean = s / n;
  double ss = 0.0;
  for (double v : xs) ss += (v - mean) * (v - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

PopulationEstimate mean_population(const Environment& env, const Box& box, double kappa, double t,
                                   const Site& x, long long n_runs, std::uint64_t seed, unsigned threads,
                                   long long population_cap) {
  const auto runs = many_runs(env, box, kappa, t, x, n_runs, seed, threads, population_cap);
  std::vector<double> z;
  z.reserve(runs.size());
  PopulationEstimate est;
  est.n_runs = n_runs;
  for (const auto& r : runs) {
    z.push_back(r.zeta);
    est.truncated_runs += r.truncated;
  }
  mean_and_stderr(z, est.mean, est.stderr);
  return est;
}

bool GrowthBoundReport::exits_ok() const { return std::isnan(exits_bound) || exits_ucl <= exits_bound; }

GrowthBoundReport growth_bound_check(const Environment& env, const Box& box, double kappa, double t,
                                     long long n_runs, std::uint64_t seed, unsigned threads) {
  GrowthBoundReport rep;
  rep.n = box.radius();
  rep.t = t;
  rep.v_n = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) rep.v_n = std::max(rep.v_n, env.v_plus(box.site(i)));
  const Site centre = box.center();
  const auto runs = many_runs(env, box, kappa, t, centre, n_runs, seed, threads, kDefaultPopulationCap);
  std::vector<double> z, e;
  for (const auto& r : runs) {
    z.push_back(r.zeta);
    e.push_back(r.exits);
    rep.zeta.truncated_runs += r.truncated;
  }
  rep.zeta.n_runs = n_runs;
  mean_and_stderr(z, rep.zeta.mean, rep.zeta.stderr);
  mean_and_stderr(e, rep.exits_mean, rep.exits_stderr);
  rep.zeta_ucl = rep.zeta.mean + kUcl975 * rep.zeta.stderr;
  rep.exits_ucl = rep.exits_mean + kUcl975 * rep.exits_stderr;
  rep.zeta_bound = std::exp(rep.v_n * t);
  const double n = rep.n;
  if (kappa > 0.0 && t > 0.0 && n >= 2.0 * kappa * t) {
    rep.exits_bound = 4.0 * box.dim() *
                      std::exp((rep.v_n - 2.0 * kappa) * t - n * std::log(n / (2.0 * M_E * kappa * t)));
  } else if (kappa == 0.0 || t == 0.0) {
    rep.exits_bound = 0.0;
  } else {
    rep.exits_bound = kNaN;
  }
  return rep;
}

}  // namespace brwre
