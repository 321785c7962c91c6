#pragma once

#include <string>
#include <string_view>

namespace brwre {

enum class TailKind { Weibull, DoubleExp, SquaredDoubleExp, Frechet, HardCore };

/// Law of the effective potential v(0) at a single site.
///
///   Weibull(rho > 1)      P[v > x] = exp(-x^rho),          x > 0
///   DoubleExp(rho > 0)    P[v > x] = exp(-e^{x / rho}),    x real
///   SquaredDoubleExp      P[v > x] = exp(-e^{x^2}),        x >= 0, atom at 0
///   Frechet(rho > 0)      P[v > -x] = exp(-x^{-rho}),      x > 0
///   HardCore(0 < p < 1)   v = -inf with probability p, else 0
///
/// Construction validates the parameter; an invalid family cannot exist.
class TailFamily {
 public:
  static TailFamily weibull(double rho);
  static TailFamily double_exp(double rho);
  static TailFamily squared_double_exp();
  static TailFamily frechet(double rho);
  static TailFamily hard_core(double p);
  static TailFamily make(TailKind kind, double param);
  /// Accepts the names produced by name().
  static TailFamily parse(std::string_view name, double param);

  TailKind kind() const { return kind_; }
  /// rho, or p for HardCore; 0 for SquaredDoubleExp.
  double param() const { return param_; }

  std::string name() const;
  /// e.g. "rho=2" or "p=0.5"; empty for SquaredDoubleExp.
  std::string param_string() const;

  bool has_hard_core() const { return kind_ == TailKind::HardCore; }

  friend bool operator==(const TailFamily&, const TailFamily&) = default;

 private:
  TailFamily(TailKind kind, double param) : kind_(kind), param_(param) {}
  TailKind kind_;
  double param_;
};

TailKind tail_kind_from_name(std::string_view name);
std::string_view tail_kind_name(TailKind kind);

/// Quantile q(u) with P[v <= q] = u for 0 < u < 1. The hard-core atom sits at
/// the lowest quantiles: q(u) = -inf for u < p.
double tail_quantile(const TailFamily& family, double u);

/// Quantile expressed through the exponential level e = -log(1 - u), which
/// keeps full precision deep in the upper tail. Returns -inf on hard core.
double quantile_at_level(const TailFamily& family, double level);

/// P[v > x].
double tail_survival(const TailFamily& family, double x);

/// P[v <= x].
double tail_cdf(const TailFamily& family, double x);

}  // namespace brwre
