#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/log_math.hpp"
#include "brwre/stats.hpp"
#include "brwre/tail_family.hpp"

namespace brwre {

inline constexpr double kDefaultScaleExponent = 1.5;
inline constexpr int kBootstrapResamples = 1000;

/// Replica log-moments log m_r(0, t) on a time grid, one row per replica.
/// Replica r uses the environment seeded by derive_seed(seed, "replica", r).
struct ReplicaMoments {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> log_m;  ///< [replica][t index]
  int window_radius = 0;                    ///< 0 when kappa = 0
};

ReplicaMoments replica_log_moments(const TailFamily& family, double kappa, int dim,
                                   const std::vector<double>& t_grid, int replicas, double tol,
                                   std::uint64_t seed, unsigned threads = 0);

struct AnnealedEstimate {
  double t = 0.0;
  int replicas = 0;
  double h1_hat = 0.0;  ///< log of the replica mean of m(0,t)
  Interval ci;          ///< percentile bootstrap
  double h_lower = 0.0; ///< H(t) - 2 d kappa t
  double h_upper = 0.0; ///< H(t)
  /// point estimate inside [H - 2d kappa t - hw, H + hw] with hw the CI half width
  bool in_sandwich() const;
};

/// kappa = 0 uses exp(v(0) t) per replica; kappa > 0 solves one local
/// environment per replica.
std::vector<AnnealedEstimate> estimate_H1(const TailFamily& family, double kappa, int dim,
                                          const std::vector<double>& t_grid, int replicas,
                                          double tol, std::uint64_t seed, unsigned threads = 0,
                                          double level = 0.95);

struct FThetaRow {
  double theta = 0.0;
  double t = 0.0;
  double f_hat = 0.0;
  Interval ci;           ///< joint bootstrap over replicas, 95%
  double g_exact = 0.0;  ///< G_theta(t) from quadrature
};

/// F_theta(t) = (H1((1+theta)t) - (1+theta) H1(t)) / theta from shared replicas.
std::vector<FThetaRow> estimate_F_theta(const TailFamily& family, double kappa, int dim,
                                        const std::vector<double>& theta_grid,
                                        const std::vector<double>& t_grid, int replicas,
                                        std::uint64_t seed, double tol = 1e-8, unsigned threads = 0);

struct CorrelationRow {
  Site y;
  double cov = 0.0;  ///< sample covariance of m(0,t), m(y,t)
  double cov_stderr = 0.0;
  double corr = 0.0;
  double cov_trunc = 0.0;  ///< same for the truncated moments at scale (kappa t)^a
  double cov_trunc_stderr = 0.0;
  double corr_trunc = 0.0;
  bool disjoint_windows = false;  ///< |y| > 2 (kappa t)^a
  double exact = kNaN;            ///< kappa = 0 only
};

std::vector<CorrelationRow> correlation_profile(const TailFamily& family, double kappa, int dim,
                                                double t, double a, const std::vector<Site>& ys,
                                                int replicas, std::uint64_t seed,
                                                unsigned threads = 0);

/// Radius of the truncation box at scale (kappa t)^a.
int scale_radius(double kappa, double t, double a);

struct IntRange {
  int lo = 0;
  int hi = -1;  ///< inclusive; empty when hi < lo
  int size() const { return hi >= lo ? hi - lo + 1 : 0; }
};

struct PartitionChecks {
  bool tiling = false;          ///< partition boxes tile Lambda_L
  bool box_sizes = false;       ///< L'^d <= |box| <= (L'+1)^d
  bool parity_separation = false;  ///< same-class boxes at distance >= L'
  bool strip_fraction = false;  ///< |S_L| / (2L+1)^d within its bound
  bool all() const { return tiling && box_sizes && parity_separation && strip_fraction; }
};

struct PartitionPlan {
  int L = 0, L_prime = 0, r = 0, dim = 0;
  int q = 0, q_bar = 0;
  std::vector<IntRange> intervals;       ///< I_1..I_q (0-based here)
  std::vector<IntRange> main_intervals;  ///< J_1..J_q
  long long strip_size = 0;
  double strip_fraction = 0.0;
  double strip_bound = 0.0;
  PartitionChecks checks;

  std::size_t box_count() const;
  /// Index tuple (0-based) of the k-th partition box.
  std::vector<int> box_index(std::size_t k) const;
  /// Parity class of a box: bit k set when i_k (1-based) is even.
  unsigned parity_class(std::size_t k) const;
  /// Partition box containing a site of Lambda_L.
  std::size_t box_of(const Site& s) const;
  std::string to_json() const;
};

/// Parity and strip-box partitions of Lambda_L at scale L' with fine scale r.
/// Throws when r <= L' <= L fails, or when 2L+1 = q L' + q_bar has q_bar >= q
/// (the boxes would then need sides above L'+1).
PartitionPlan build_partitions(int L, int L_prime, int r, int dim);

/// Recomputes the four checks by enumeration.
PartitionChecks verify_partitions(const PartitionPlan& plan);

struct BlockVarianceReport {
  double t = 0.0;
  int L = 0;
  int scale = 0;    ///< truncation radius
  int replicas = 0;
  double mean_sum = 0.0;
  double var_sum = 0.0;        ///< replica variance of sum over Lambda_L of m~_a
  double var_predicted = 0.0;  ///< |Lambda_L| sum_y c_a(0,y,t), c_a pooled over sites and replicas
  double ratio = 0.0;          ///< var_sum / var_predicted
  double var_exact = kNaN;     ///< kappa = 0: (2L+1)^d Var(e^{vt})
  std::vector<double> class_var;          ///< replica variance of each parity-class sum
  std::vector<double> class_box_var_sum;  ///< sum over the class of per-box variances
  bool ratio_ok() const { return ratio >= 0.8 && ratio <= 1.25; }
};

using EnvironmentMaker = std::function<Environment(int replica, int window_radius)>;

BlockVarianceReport block_variance(const EnvironmentMaker& make_env, double kappa, int dim, double t,
                                   int L, double a, int replicas, unsigned threads = 0);

BlockVarianceReport block_variance(const TailFamily& family, double kappa, int dim, double t, int L,
                                   double a, int replicas, std::uint64_t seed, unsigned threads = 0);

}  // namespace brwre
