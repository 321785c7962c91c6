#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/lattice_operator.hpp"
#include "brwre/log_math.hpp"

namespace brwre {

enum class SolveMethod { Auto, DenseEig, Krylov, RK45 };

SolveMethod solve_method_from_name(const std::string& name);
std::string solve_method_name(SolveMethod m);

/// The explicit integrator hit its step budget or a vanishing step.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double max_abs_v)
      : std::runtime_error(what), max_abs_v_(max_abs_v) {}
  double max_abs_v() const { return max_abs_v_; }

 private:
  double max_abs_v_;
};

/// The environment window cannot hold the box a solve needs.
class WindowTooSmall : public std::runtime_error {
 public:
  WindowTooSmall(const std::string& what, int needed_radius)
      : std::runtime_error(what), needed_radius_(needed_radius) {}
  /// Window radius that would be large enough.
  int needed_radius() const { return needed_radius_; }

 private:
  int needed_radius_;
};

/// m(x, t) = mantissa(x) * exp(log_offset) on every site of the box
/// (0 on hard core).
struct MomentField {
  Box box;
  double t = 0.0;
  double kappa = 0.0;
  std::vector<double> mantissa;
  double log_offset = 0.0;

  double log_value(std::size_t box_index) const;
  double log_value(const Site& s) const { return log_value(box.index(s)); }
  /// log of the sum over the box.
  double log_sum() const;
};

/// m~_U(., t) with U = box minus hard core.
/// Auto picks DenseEig for |U| <= 400 and Krylov above; kappa = 0 is solved exactly.
MomentField solve_truncated(const Environment& env, const Box& box, double kappa, double t,
                            SolveMethod method = SolveMethod::Auto, double tol = 1e-10);

inline constexpr double kTruncationExponent = 1.5;

/// Smallest integer R >= 1 with -2 kappa t I(R / (2 kappa t)) + 2 d kappa t < log(tol).
int truncation_radius(int dim, double kappa, double t, double tol);

struct UntruncatedMoment {
  double mantissa = 0.0;
  double log_offset = 0.0;
  int radius_used = 0;
  double log_value() const { return mantissa > 0.0 ? std::log(mantissa) + log_offset : kNegInf; }
};

/// m(x, t) approximated by the solve on Lambda(x, R) with R from truncation_radius.
UntruncatedMoment solve_untruncated(const Environment& env, const Site& x, double kappa, double t,
                                    double tol = 1e-8, SolveMethod method = SolveMethod::Auto);

struct EmpiricalAverage {
  double log_value = kNegInf;  ///< log m^L
  int radius_used = 0;
};

/// log of (2L+1)^{-d} sum over x in Lambda_L of m(x, t).
/// For kappa > 0 a single solve on Lambda_{L+R} serves every x in Lambda_L.
EmpiricalAverage empirical_average(const Environment& env, int L, double kappa, double t,
                                   double tol = 1e-8, SolveMethod method = SolveMethod::Auto);

}  // namespace brwre
