#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "brwre/lattice.hpp"
#include "brwre/tail_family.hpp"

namespace brwre {

/// How an environment was produced; absent for hand-built ones.
struct EnvProvenance {
  TailFamily family = TailFamily::squared_double_exp();
  std::uint64_t seed = 0;
  double baseline_death = 0.0;

  friend bool operator==(const EnvProvenance&, const EnvProvenance&) = default;
};

/// Per-site rates (v_minus, v_plus) on the window [-R, R]^d.
/// Hard core is a flag; v_minus stores 0 there and is reported as +inf.
class Environment {
 public:
  Environment(Box window, std::vector<double> v_minus, std::vector<double> v_plus,
              std::vector<std::uint8_t> hard_core, std::optional<EnvProvenance> provenance = {});

  /// Builds from effective potentials v (may be -inf), split into positive and
  /// negative parts.
  static Environment from_potential(Box window, const std::vector<double>& v);
  /// Constant potential c on the centered window of the given radius.
  static Environment constant(int dim, int radius, double c);

  const Box& window() const { return window_; }
  int dim() const { return window_.dim(); }
  int radius() const { return window_.radius(); }
  std::size_t size() const { return window_.size(); }

  bool hard_core(std::size_t i) const { return hard_core_[i] != 0; }
  bool hard_core(const Site& s) const { return hard_core(window_.index(s)); }
  double v_plus(std::size_t i) const { return v_plus_[i]; }
  double v_plus(const Site& s) const { return v_plus_[window_.index(s)]; }
  /// +inf on hard core.
  double v_minus(std::size_t i) const;
  double v_minus(const Site& s) const { return v_minus(window_.index(s)); }
  /// Finite part of v_minus; 0 on hard core.
  double v_minus_finite(std::size_t i) const { return v_minus_[i]; }
  /// v_plus - v_minus, or -inf on hard core.
  double v(std::size_t i) const;
  double v(const Site& s) const { return v(window_.index(s)); }

  std::size_t hard_core_count() const;
  const std::optional<EnvProvenance>& provenance() const { return provenance_; }

  friend bool operator==(const Environment&, const Environment&) = default;

 private:
  Box window_;
  std::vector<double> v_minus_;
  std::vector<double> v_plus_;
  std::vector<std::uint8_t> hard_core_;
  std::optional<EnvProvenance> provenance_;
};

struct EffectivePotential {
  Box window;
  std::vector<double> v;  ///< -inf on hard core
};

/// i.i.d. draws by inverse CDF. Each site owns a stream keyed by its
/// coordinates, so windows of different radii agree on shared sites.
/// baseline_death >= 0 is added to both rates and leaves v unchanged.
Environment sample_environment(const TailFamily& family, int dim, int radius, std::uint64_t seed,
                               double baseline_death = 0.0);

/// The effective potential of a single site as sample_environment draws it.
double sample_site_potential(const TailFamily& family, const Site& site, int dim, std::uint64_t seed);

EffectivePotential effective_potential(const Environment& env);

/// Caps v_plus at vmax sitewise. The result carries no provenance.
Environment clip_branching(const Environment& env, double vmax);

/// Restriction of env to a smaller window inside it.
Environment restrict_environment(const Environment& env, const Box& sub);

/// env.csv columns: x0..x{d-1}, v_minus, v_plus, hardcore.
void write_environment_csv(const Environment& env, std::ostream& out);
/// env.json header: family, params, seed, dim, radius.
std::string environment_header_json(const Environment& env);
void save_environment(const Environment& env, const std::filesystem::path& csv_path,
                      const std::filesystem::path& json_path);
Environment load_environment(const std::filesystem::path& csv_path,
                             const std::filesystem::path& json_path);

}  // namespace brwre
