#pragma once

#include <cstdint>
#include <vector>

#include "brwre/environment.hpp"

namespace brwre {

inline constexpr long long kDefaultPopulationCap = 10'000'000;

/// Occupation numbers of the branching/annihilating walk on a box.
/// A particle that jumps onto hard core is counted as a death; one that jumps
/// out of the box is a boundary kill. zeta = 1 + branch - death - boundary_kill.
struct ParticleState {
  Box box;
  std::vector<long long> eta;  ///< per box site
  double time = 0.0;
  long long zeta = 0;
  long long branch = 0;
  long long death = 0;
  long long jump = 0;
  long long boundary_kill = 0;
  long long hard_core_kill = 0;  ///< deaths caused by jumps onto hard core
};

struct TrajectoryPoint {
  double time;
  long long zeta;
};

struct ParticleRun {
  ParticleState state;                 ///< at t_end (or when the run stopped)
  std::vector<TrajectoryPoint> trajectory;  ///< (0, 1) then one point per event, if recorded
  bool truncated = false;              ///< population cap exceeded
};

/// Gillespie simulation from one particle at x. Each particle at y jumps at
/// rate kappa to each of its 2d neighbours, branches at rate v_plus(y) and dies
/// at rate v_minus(y).
ParticleRun gillespie_run(const Environment& env, const Box& box, double kappa, double t_end,
                          const Site& x, std::uint64_t seed, bool record_trajectory = false,
                          long long population_cap = kDefaultPopulationCap);

struct PopulationEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  long long n_runs = 0;
  long long truncated_runs = 0;
  double log_mean() const;
  /// stderr / mean
  double log_stderr() const;
};

/// Sample mean of zeta(t) over n_runs runs; run r uses derive_seed(seed, "particles", r).
PopulationEstimate mean_population(const Environment& env, const Box& box, double kappa, double t,
                                   const Site& x, long long n_runs, std::uint64_t seed,
                                   unsigned threads = 0,
                                   long long population_cap = kDefaultPopulationCap);

struct GrowthBoundReport {
  int n = 0;       ///< box radius
  double t = 0.0;
  double v_n = 0.0;  ///< max v_plus on the box
  PopulationEstimate zeta;
  double zeta_ucl = 0.0;  ///< 97.5% upper confidence limit
  double zeta_bound = 0.0;  ///< exp(v_n t)
  double exits_mean = 0.0;
  double exits_stderr = 0.0;
  double exits_ucl = 0.0;
  double exits_bound = 0.0;  ///< 4d exp((v_n - 2 kappa) t - n log(n / (2 e kappa t))), NaN when n < 2 kappa t
  bool zeta_ok() const { return zeta_ucl <= zeta_bound; }
  bool exits_ok() const;
};

/// Population and boundary-flux bounds for the process on a box started from
/// its centre.
GrowthBoundReport growth_bound_check(const Environment& env, const Box& box, double kappa, double t,
                                     long long n_runs, std::uint64_t seed, unsigned threads = 0);

}  // namespace brwre
