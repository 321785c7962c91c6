#pragma once

#include <cstdint>
#include <optional>

#include "brwre/environment.hpp"
#include "brwre/rng.hpp"
#include "brwre/stats.hpp"

namespace brwre {

/// Continuous-time simple random walk on Z^d with total jump rate 2 d kappa.
class WalkGenerator {
 public:
  WalkGenerator(int dim, double kappa);
  int dim() const { return dim_; }
  double rate() const { return rate_; }
  /// Exponential holding time with mean 1/(2 d kappa).
  double holding_time(Rng& rng) const { return rng.exponential() / rate_; }
  /// Direction in [0, 2d): axis k = dir / 2, sign + when dir is odd.
  int direction(Rng& rng) const { return static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * dim_))); }
  static void step(Site& s, int dir) { s[dir / 2] += (dir % 2) ? 1 : -1; }

 private:
  int dim_;
  double rate_;
};

struct FkEstimate {
  double log_mean = 0.0;
  double log_stderr = 0.0;  ///< delta-method standard error of log_mean
  long long n_paths = 0;
  long long n_killed = 0;
  bool all_killed = false;
};

/// Monte Carlo of E_x[exp(int_0^t v(X_s) ds); no hard core hit (; no exit from box)].
/// Path i draws from its own stream derive_seed(seed, "fk-path", i), so runs with
/// and without a box use common random numbers and results do not depend on
/// the thread count. Without a box the walk must stay in the environment
/// window; a path that leaves it raises WindowTooSmall.
FkEstimate fk_estimate(const Environment& env, const Site& x, double kappa, double t,
                       const std::optional<Box>& box, long long n_paths, std::uint64_t seed,
                       unsigned threads = 0);

struct ExitTailEstimate {
  int x = 0;
  double t = 0.0;
  long long n_paths = 0;
  long long exits = 0;
  double p_hat = 0.0;
  Interval ci;    ///< Wilson interval
  double bound = 0.0;  ///< 4 exp(-2 kappa t I(x / (2 kappa t)))
  bool bound_holds() const { return ci.hi <= bound; }
};

/// P[sup_{s <= t} |X_s^1| >= x] for one coordinate of the walk, which jumps at
/// rate 2 kappa. ci is two-sided at `level`, so level 0.95 gives the 97.5% upper limit.
ExitTailEstimate exit_tail_mc(double kappa, int dim, int x, double t, long long n_paths,
                              std::uint64_t seed, double level = 0.95);

}  // namespace brwre
