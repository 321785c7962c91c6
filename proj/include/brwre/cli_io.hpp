#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "brwre/pam_solver.hpp"
#include "brwre/regime_lab.hpp"
#include "brwre/tail_family.hpp"

namespace brwre {

const char* version_string();

/// Every problem found in a config document, in line order.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct RunConfig {
  std::string subcommand;
  std::optional<TailFamily> family;
  int dim = 1;
  double kappa = 0.0;
  std::vector<double> t_grid{1.0};
  std::vector<double> theta_grid{0.5};
  std::vector<long long> L_list{0};
  int radius = -1;      ///< environment window; -1 picks one from L and the truncation radius
  int box_radius = -1;  ///< fk / particles / spectral box; -1 means untruncated (fk) or 4
  int replicas = 200;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  std::string out = "out";
  unsigned threads = 0;
  SolveMethod method = SolveMethod::Auto;
  long long n_paths = 100000;
  long long n_runs = 10000;
  double vmax = -1.0;  ///< clip v_plus; < 0 disables
  double baseline_death = 0.0;
  std::string env_file;
  // exponents-mc
  double a = 1.5;
  std::vector<long long> corr_y;  ///< offsets along the first axis
  int L_prime = 0;                ///< 0: no partition
  int fine_r = 0;
  // regime
  std::string experiment = "lln";
  std::string schedule = "gamma";
  double gamma = 1.0;
  double delta = 0.1;
  std::vector<std::pair<double, double>> f_eps;
  RegimeThresholds thresholds;
  int top_k = 4096;
  long long direct_max_sites = 1'000'000;
  long long max_L = 10'000'000'000'000LL;

  /// key = value lines in a fixed order; parse_config(normalized()) round-trips.
  std::string normalized() const;
};

/// Flat key = value document; '#' starts a comment, [section] lines only group.
/// overrides ("key=value") replace document values. Throws ConfigError.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

RunConfig read_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Shortest round-trip-safe text is not used; floats always get 17 significant digits.
std::string format_double(double x);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::vector<std::string> files;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool all_passed() const;
};

/// Runs cfg.subcommand, writing into cfg.out: the CSVs of that subcommand,
/// config.cfg (normalized echo) and summary.json.
RunReport run_subcommand(const RunConfig& cfg);

const std::vector<std::string>& subcommand_names();

}  // namespace brwre
