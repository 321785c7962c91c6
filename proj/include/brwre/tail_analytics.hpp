#pragma once

#include <stdexcept>
#include <string>

#include "brwre/tail_family.hpp"

namespace brwre {

/// Adaptive quadrature ran out of budget before reaching its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double error_bound)
      : std::runtime_error(what), error_bound_(error_bound) {}
  /// Relative error bound reached when the budget ran out.
  double error_bound() const { return error_bound_; }

 private:
  double error_bound_;
};

class RootFindError : public std::runtime_error {
 public:
  RootFindError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_, hi_;
};

/// log E[e^{t v}; e_lo <= L <= e_hi] where L = -log(1 - F(v)) ~ Exp(1) is the
/// exponential level of v. Hard-core sites contribute zero.
double log_level_integral(const TailFamily& family, double t, double e_lo, double e_hi);

/// H(t) = log <e^{t v(0)}>, t >= 0. log(1-p) for hard core.
double cumulant_H(const TailFamily& family, double t);

/// log E[e^{t v}; L <= level_max], the moment with the top of the tail cut off.
double truncated_log_moment(const TailFamily& family, double t, double level_max);

/// G_theta(t) = (H((1+theta)t) - (1+theta)H(t)) / theta, theta > -1, theta != 0.
double cumulant_exponent_G(const TailFamily& family, double theta, double t);

/// I(y) = y asinh(y) - sqrt(1+y^2) + 1 for y >= 0.
double rate_I(double y);

enum class GrowthKind {
  CumulantH,        ///< J = H(t)
  Linear,           ///< J = t
  LogCorrected,     ///< J = t / (2 sqrt(log t))
  HardCorePower,    ///< J = c2 t^{d/(d+2)}, c2 unknown
  FrechetScale,     ///< J = chi t / alpha_t^2, chi unknown
};

struct ExponentTable {
  TailFamily family = TailFamily::squared_double_exp();
  int dim = 1;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  GrowthKind j_kind = GrowthKind::Linear;
  /// Name of the unknown multiplicative constant in J, or empty.
  std::string j_constant;
  /// Exponents not derived in closed form for this family.
  bool empirical_only = false;
  /// nu = 1/(d+2+2 rho) for Frechet, 0 otherwise.
  double nu = 0.0;

  std::string j_name() const;
  std::string j_params() const;
};

ExponentTable transition_exponents(const TailFamily& family, int dim);

/// Critical function a(gamma) for 0 < gamma <= gamma1.
double critical_a(const TailFamily& family, int dim, double gamma);

/// Scale function alpha_t of the Frechet class: the root of
/// k(t alpha^{-d}) alpha^{d+2} = t with k = -H.
double frechet_alpha(const TailFamily& family, int dim, double t);

/// J(t). Unknown constants (chi, c2) are set to 1.
double growth_J(const TailFamily& family, int dim, double t);

}  // namespace brwre
