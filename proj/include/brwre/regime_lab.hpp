#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "brwre/log_math.hpp"
#include "brwre/tail_analytics.hpp"
#include "brwre/tail_family.hpp"

namespace brwre {

/// Law of v(0) as seen by the kappa = 0 pipeline, through its exponential level.
struct SiteLaw {
  std::string name;
  std::function<double(double level)> quantile;  ///< may return -inf
  std::function<double(double t)> H;
  /// log E[e^{t v}; level <= level_max]
  std::function<double(double t, double level_max)> truncated_log_moment;
};

SiteLaw site_law(const TailFamily& family);
/// v = c with probability p, else 0.
SiteLaw two_point_law(double c, double p);

enum class ScheduleKind { Explicit, GammaJ, FEpsilon };

struct ScheduleRule {
  ScheduleKind kind = ScheduleKind::GammaJ;
  std::vector<long long> explicit_L;  ///< one per t in the grid
  double gamma = 0.0;                 ///< d log L = gamma J(t)
  std::vector<std::pair<double, double>> f_table;  ///< (t, F_eps(t)); d log L = F_eps(t)
};

/// L exceeds the configured budget.
class ScheduleOverflow : public std::runtime_error {
 public:
  ScheduleOverflow(const std::string& what, double required_L)
      : std::runtime_error(what), required_L_(required_L) {}
  double required_L() const { return required_L_; }

 private:
  double required_L_;
};

struct ScheduledL {
  long long L = 1;
  double gamma_equivalent = 0.0;  ///< d log L / J(t)
};

/// Rounds up. t_index picks the explicit entry.
ScheduledL schedule_L(const ScheduleRule& rule, const TailFamily& family, int dim, double t,
                      std::size_t t_index = 0, long long max_L = 10'000'000'000'000LL);

struct RegimeThresholds {
  double band = 0.05;
  double fraction = 0.95;
  double max_abs_skew = 0.2;
  double max_abs_exkurt = 0.5;
  double min_ks_p = 0.01;
  double degenerate_median = 0.1;
};

struct RegimeConfig {
  TailFamily family = TailFamily::weibull(2);
  int dim = 1;
  double kappa = 0.0;
  std::vector<double> t_grid;
  ScheduleRule schedule;
  int replicas = 200;
  RegimeThresholds thresholds;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  long long max_L = 10'000'000'000'000LL;
  /// kappa = 0: sample every site when (2L+1)^d is at most this; above it the
  /// top order statistics are exact and the rest of the sum is Gaussian.
  long long direct_max_sites = 1'000'000;
  int top_k = 4096;
  unsigned threads = 0;
  /// Replaces the family law in the kappa = 0 pipeline (tests, enumeration).
  std::optional<SiteLaw> law_override;
};

enum class Classification { Annealed, NonAnnealed, Gaussian, NonGaussian, Inconclusive };
std::string classification_name(Classification c);

struct RegimeVerdict {
  std::string experiment;  ///< lln, clt, critical
  std::string family;
  double kappa = 0.0;
  int dim = 1;
  double t = 0.0;
  long long L = 1;
  double gamma = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int replicas = 0;
  std::string sampler;  ///< direct, hybrid, solver
  // ratio m^L / reference
  double log_reference = 0.0;
  double reference_halfwidth = 0.0;  ///< kappa > 0: systematic half width in log
  double ratio_mean = 0.0, ratio_sd = 0.0, ratio_q05 = 0.0, ratio_q50 = 0.0, ratio_q95 = 0.0;
  double frac_in_band = 0.0;
  double frac_below_half = 0.0;
  // standardized statistic
  double stat_skew = kNaN, stat_exkurt = kNaN, ks_p = kNaN, median_abs_stat = kNaN;
  bool degenerate = false;
  // critical
  double a_gamma = kNaN, delta = kNaN, log_normalizer = kNaN, frac_below_normalizer = kNaN;
  Classification classification = Classification::Inconclusive;
  bool passed = false;  ///< the verdict the experiment asked for
};

/// log m^L per replica for one (t, L). Exposed for tests.
std::vector<double> replica_log_averages(const RegimeConfig& cfg, double t, long long L, std::string* sampler = nullptr);

/// Exact kappa = 0 references: log <m> = H(t) and Var of one site.
struct Kappa0Reference {
  double log_mean = 0.0;
  double site_variance = 0.0;  ///< e^{H(2t)} - e^{2H(t)}
};
Kappa0Reference kappa0_reference(const SiteLaw& law, double t);

std::vector<RegimeVerdict> lln_experiment(const RegimeConfig& cfg);
std::vector<RegimeVerdict> clt_experiment(const RegimeConfig& cfg);
/// Fraction of replicas with m^L below the critical normalizer; gamma in (0, gamma1).
std::vector<RegimeVerdict> critical_experiment(const RegimeConfig& cfg, double gamma, double delta);

}  // namespace brwre
