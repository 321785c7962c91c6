#include "brwre/tail_family.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "brwre/log_math.hpp"

namespace brwre {

namespace {

std::string format_param(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// h(x) with P[v > x] = exp(-h(x)); +inf where the survival is zero.
double log_survival_rate(const TailFamily& f, double x) {
  const double rho = f.param();
  switch (f.kind()) {
    case TailKind::Weibull:
      return x <= 0.0 ? 0.0 : std::pow(x, rho);
    case TailKind::DoubleExp:
      return std::exp(x / rho);
    case TailKind::SquaredDoubleExp:
      return x < 0.0 ? 0.0 : std::exp(x * x);
    case TailKind::Frechet:
      return x >= 0.0 ? std::numeric_limits<double>::infinity() : std::pow(-x, -rho);
    case TailKind::HardCore:
      return x < 0.0 ? -std::log1p(-rho) : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

}  // namespace

TailFamily TailFamily::weibull(double rho) {
  if (!(rho > 1.0) || !std::isfinite(rho))
    throw std::invalid_argument("weibull: rho > 1 required (got " + format_param(rho) + ")");
  return {TailKind::Weibull, rho};
}

TailFamily TailFamily::double_exp(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("double_exp: rho > 0 required (got " + format_param(rho) + ")");
  return {TailKind::DoubleExp, rho};
}

TailFamily TailFamily::squared_double_exp() { return {TailKind::SquaredDoubleExp, 0.0}; }

TailFamily TailFamily::frechet(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("frechet: rho > 0 required (got " + format_param(rho) + ")");
  return {TailKind::Frechet, rho};
}

TailFamily TailFamily::hard_core(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("hard_core: 0 < p < 1 required (got " + format_param(p) + ")");
  return {TailKind::HardCore, p};
}

TailFamily TailFamily::make(TailKind kind, double param) {
  switch (kind) {
    case TailKind::Weibull:
      return weibull(param);
    case TailKind::DoubleExp:
      return double_exp(param);
    case TailKind::SquaredDoubleExp:
      return squared_double_exp();
    case TailKind::Frechet:
      return frechet(param);
    case TailKind::HardCore:
      return hard_core(param);
  }
  throw std::invalid_argument("unknown tail family");
}

TailFamily TailFamily::parse(std::string_view name, double param) {
  return make(tail_kind_from_name(name), param);
}

std::string TailFamily::name() const { return std::string(tail_kind_name(kind_)); }

std::string TailFamily::param_string() const {
  switch (kind_) {
    case TailKind::SquaredDoubleExp:
      return "";
    case TailKind::HardCore:
      return "p=" + format_param(param_);
    default:
      return "rho=" + format_param(param_);
  }
}

std::string_view tail_kind_name(TailKind kind) {
  switch (kind) {
    case TailKind::Weibull:
      return "weibull";
    case TailKind::DoubleExp:
      return "double_exp";
    case TailKind::SquaredDoubleExp:
      return "squared_double_exp";
    case TailKind::Frechet:
      return "frechet";
    case TailKind::HardCore:
      return "hard_core";
  }
  return "unknown";
}

TailKind tail_kind_from_name(std::string_view name) {
  for (TailKind k : {TailKind::Weibull, TailKind::DoubleExp, TailKind::SquaredDoubleExp,
                     TailKind::Frechet, TailKind::HardCore}) {
    if (tail_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown family '" + std::string(name) +
                              "' (expected weibull, double_exp, squared_double_exp, "
                              "frechet or hard_core)");
}

double quantile_at_level(const TailFamily& f, double level) {
  const double rho = f.param();
  switch (f.kind()) {
    case TailKind::Weibull:
      return std::pow(level, 1.0 / rho);
    case TailKind::DoubleExp:
      return rho * std::log(level);
    case TailKind::SquaredDoubleExp:
      return level <= 1.0 ? 0.0 : std::sqrt(std::log(level));
    case TailKind::Frechet:
      return -std::pow(level, -1.0 / rho);
    case TailKind::HardCore:
      return level < -std::log1p(-rho) ? kNegInf : 0.0;
  }
  return 0.0;
}

double tail_quantile(const TailFamily& f, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("tail_quantile: 0 < u < 1 required");
  if (f.kind() == TailKind::HardCore) return u < f.param() ? kNegInf : 0.0;
  return quantile_at_level(f, -std::log1p(-u));
}

double tail_survival(const TailFamily& f, double x) {
  return std::exp(-log_survival_rate(f, x));
}

double tail_cdf(const TailFamily& f, double x) { return -std::expm1(-log_survival_rate(f, x)); }

}  // namespace brwre
