#include "brwre/fk_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "brwre/log_math.hpp"
#include "brwre/pam_solver.hpp"
#include "brwre/parallel.hpp"
#include "brwre/rng.hpp"
#include "brwre/tail_analytics.hpp"

namespace brwre {

namespace {

constexpr long long kPathsPerChunk = 2048;

LogMeanAccumulator tree_merge(std::vector<LogMeanAccumulator> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<LogMeanAccumulator> next;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      parts[i].merge(parts[i + 1]);
      next.push_back(parts[i]);
    }
    if (parts.size() % 2) next.push_back(parts.back());
    parts.swap(next);
  }
  return parts.front();
}

}  // namespace

WalkGenerator::WalkGenerator(int dim, double kappa) : dim_(dim), rate_(2.0 * dim * kappa) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(kappa > 0.0)) throw std::invalid_argument("walk needs kappa > 0");
}

FkEstimate fk_estimate(const Environment& env, const Site& x, double kappa, double t,
                       const std::optional<Box>& box, long long n_paths, std::uint64_t seed,
                       unsigned threads) {
  if (n_paths < 100) throw std::invalid_argument("fk_estimate needs n_paths >= 100");
  if (!(kappa >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("kappa and t must be >= 0");
  if (!env.window().contains(x)) throw std::invalid_argument("start site outside the window");
  if (box && !env.window().contains(*box)) throw std::invalid_argument("box does not fit inside the window");
  FkEstimate out;
  out.n_paths = n_paths;
  const bool starts_dead = env.hard_core(x) || (box && !box->contains(x));
  if (starts_dead) {
    out.log_mean = kNegInf;
    out.log_stderr = kNaN;
    out.n_killed = n_paths;
    out.all_killed = true;
    return out;
  }
  if (kappa == 0.0 || t == 0.0) {
    out.log_mean = env.v(x) * t;
    out.log_stderr = 0.0;
    return out;
  }

  const WalkGenerator walk(env.dim(), kappa);
  const Box& window = env.window();
  const Box& fence = box ? *box : window;
  const long long chunks = (n_paths + kPathsPerChunk - 1) / kPathsPerChunk;
  std::vector<LogMeanAccumulator> acc(static_cast<std::size_t>(chunks));
  std::vector<long long> killed(static_cast<std::size_t>(chunks), 0);

  parallel_for(static_cast<std::size_t>(chunks), threads ? threads : default_thread_budget(), [&](std::size_t c) {
    const long long lo = static_cast<long long>(c) * kPathsPerChunk;
    const long long hi = std::min(n_paths, lo + kPathsPerChunk);
    for (long long p = lo; p < hi; ++p) {
      Rng rng(derive_seed(seed, "fk-path", static_cast<std::uint64_t>(p)));
      Site pos = x;
      double s = 0.0, log_w = 0.0;
      bool alive = true;
      for (;;) {
        const double hold = walk.holding_time(rng);
        const double dt = std::min(hold, t - s);
        log_w += env.v(pos) * dt;
        s += hold;
        if (s >= t) break;
        WalkGenerator::step(pos, walk.direction(rng));
        if (!fence.contains(pos)) {
          if (!box) {
            throw WindowTooSmall("walk left the environment window; enlarge it or pass a box",
                                 window.radius() + 1);
          }
          alive = false;
          break;
        }
        if (env.hard_core(pos)) {
          alive = false;
          break;
        }
      }
      if (alive) {
        acc[c].add(log_w);
      } else {
        acc[c].add(kNegInf);
        ++killed[c];
      }
    }
  });

  const LogMeanAccumulator total = tree_merge(std::move(acc));
  for (long long k : killed) out.n_killed += k;
  out.log_mean = total.log_mean();
  out.log_stderr = total.log_stderr();
  out.all_killed = out.n_killed == n_paths;
  return out;
}

ExitTailEstimate exit_tail_mc(double kappa, int dim, int x, double t, long long n_paths,
                              std::uint64_t seed, double level) {
  if (!(kappa > 0.0)) throw std::invalid_argument("exit_tail_mc needs kappa > 0");
  if (dim < 1 || x < 0 || !(t >= 0.0) || n_paths < 1) throw std::invalid_argument("bad exit_tail_mc arguments");
  ExitTailEstimate out;
  out.x = x;
  out.t = t;
  out.n_paths = n_paths;
  // one coordinate of a rate-2d*kappa walk moves at rate 2*kappa
  const double rate = 2.0 * kappa;
  for (long long p = 0; p < n_paths; ++p) {
    if (x == 0) {
      ++out.exits;
      continue;
    }
    Rng rng(derive_seed(seed, "exit-path", static_cast<std::uint64_t>(p)));
    int pos = 0;
    double s = rng.exponential() / rate;
    while (s < t) {
      pos += rng.below(2) ? 1 : -1;
      if (std::abs(pos) >= x) {
        ++out.exits;
        break;
      }
      s += rng.exponential() / rate;
    }
  }
  out.p_hat = static_cast<double>(out.exits) / static_cast<double>(n_paths);
  out.ci = wilson_interval(out.exits, n_paths, level);
  out.bound = t > 0.0 ? 4.0 * std::exp(-2.0 * kappa * t * rate_I(x / (2.0 * kappa * t)))
                      : (x == 0 ? 4.0 : 0.0);
  return out;
}

}  // namespace brwre
