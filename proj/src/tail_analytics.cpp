#include "brwre/tail_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "brwre/log_math.hpp"

namespace brwre {

namespace {

constexpr double kQuadTol = 1e-13;
// Log-error we are willing to return; beyond this the budget counts as exhausted.
constexpr double kQuadAccept = 1e-9;
constexpr int kQuadPanels = 2000;
// Integrand is dropped once it falls this far below its peak (in log units).
constexpr double kLogDrop = 60.0;

double golden_max(const std::function<double(double)>& psi, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = psi(c), fd = psi(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = psi(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = psi(c);
    }
  }
  return 0.5 * (a + b);
}

// log of the integral of exp(psi) over [lo, hi] (either end may be infinite)
// for unimodal psi. hint is any point of (lo, hi) where psi is finite.
double log_integral_unimodal(const std::function<double(double)>& psi, double lo, double hi,
                             double hint) {
  if (!(hi > lo)) return kNegInf;
  if (!(hint > lo && hint < hi)) {
    if (std::isfinite(lo) && std::isfinite(hi))
      hint = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
      hint = lo + 1.0;
    else if (std::isfinite(hi))
      hint = hi - 1.0;
    else
      hint = 0.0;
  }
  const double f0 = psi(hint);
  // Bracket [a, b] around the maximiser: a point below f0 on each side, or the end.
  auto expand = [&](double dir, double end) {
    double step = std::max(1.0, 0.5 * std::abs(hint));
    for (;;) {
      const double x = hint + dir * step;
      if ((dir > 0 && x >= end) || (dir < 0 && x <= end)) return end;
      if (psi(x) < f0 - 1.0) return x;
      step *= 2.0;
      if (step > 1e300) throw QuadratureError("integrand does not decay", kInf);
    }
  };
  const double a = expand(-1.0, lo), b = expand(1.0, hi);
  const double peak = golden_max(psi, a, b);
  const double fmax = std::max(psi(peak), f0);
  if (!std::isfinite(fmax)) return fmax == kInf ? kInf : kNegInf;

  const double scale = std::max(1e-6, 1e-3 * (1.0 + std::abs(peak)));
  double right = peak;
  for (double step = scale;; step *= 2.0) {
    right = peak + step;
    if (right >= hi) {
      right = hi;
      break;
    }
    if (psi(right) < fmax - kLogDrop) break;
  }
  double left = peak;
  for (double step = scale;; step *= 2.0) {
    left = peak - step;
    if (left <= lo) {
      left = lo;
      break;
    }
    if (psi(left) < fmax - kLogDrop) break;
  }

  auto f = [&](double x) {
    const double y = psi(x) - fmax;
    return y < -745.0 ? 0.0 : std::exp(y);
  };
  // Globally adaptive: always bisect the panel with the largest error estimate.
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto rule = [&](double a, double b) {
    double err = 0.0;
    const double v = GK::integrate(f, a, b, 0, 0.0, &err);
    // the non-adaptive estimate is reported on the reference interval
    return Panel{a, b, v, err * 0.5 * (b - a)};
  };
  std::priority_queue<Panel> panels;
  std::vector<double> cuts{left};
  const double wl = peak - left, wr = right - peak;
  for (double frac : {1.0, 0.25, 0.05}) {
    const double x = peak - frac * wl;
    if (x > cuts.back()) cuts.push_back(x);
  }
  if (peak > cuts.back()) cuts.push_back(peak);
  for (double frac : {0.05, 0.25, 1.0}) {
    const double x = peak + frac * wr;
    if (x > cuts.back()) cuts.push_back(x);
  }
  double total = 0.0, err_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Panel p = rule(cuts[i], cuts[i + 1]);
    total += p.value;
    err_total += p.err;
    panels.push(p);
  }
  for (int n = 0; n < kQuadPanels && err_total > kQuadTol * std::abs(total); ++n) {
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel l = rule(worst.a, mid), r = rule(mid, worst.b);
    total += l.value + r.value - worst.value;
    err_total += l.err + r.err - worst.err;
    panels.push(l);
    panels.push(r);
  }
  // Drift from the running sums is far below the tolerance, but recompute once.
  total = 0.0;
  err_total = 0.0;
  for (; !panels.empty(); panels.pop()) {
    total += panels.top().value;
    err_total += panels.top().err;
  }
  if (!(total > 0.0)) return kNegInf;
  const double rel = err_total / total;
  if (!(rel <= kQuadAccept)) {
    std::ostringstream os;
    os << "quadrature did not converge (relative error bound " << rel << ")";
    throw QuadratureError(os.str(), rel);
  }
  return fmax + std::log(total);
}

double log_level_integral_impl(const TailFamily& f, double t, double e_lo, double e_hi) {
  e_lo = std::max(e_lo, 0.0);
  if (!(e_hi > e_lo)) return kNegInf;
  const double rho = f.param();

  // log of int_{a}^{b} e^{-E} dE
  auto log_exp_mass = [](double a, double b) {
    if (!(b > a)) return kNegInf;
    if (!std::isfinite(b)) return -a;
    return -a + std::log(-std::expm1(-(b - a)));
  };

  if (t == 0.0) {
    if (f.kind() == TailKind::HardCore) return log_exp_mass(std::max(e_lo, -std::log1p(-rho)), e_hi);
    return log_exp_mass(e_lo, e_hi);
  }

  switch (f.kind()) {
    case TailKind::HardCore:
      return log_exp_mass(std::max(e_lo, -std::log1p(-rho)), e_hi);

    case TailKind::Weibull:
    case TailKind::DoubleExp:
    case TailKind::Frechet: {
      // In s = log E the integrand exp(t q(e^s) - e^s + s) is smooth and unimodal.
      auto q = [&f](double e) { return quantile_at_level(f, e); };
      auto psi = [=](double s) {
        const double e = std::exp(s);
        return t * q(e) - e + s;
      };
      double peak = 0.0;
      if (f.kind() == TailKind::Weibull) peak = std::pow(t / rho, rho / (rho - 1.0));
      if (f.kind() == TailKind::DoubleExp) peak = rho * t + 1.0;
      if (f.kind() == TailKind::Frechet) peak = std::pow(t / rho, rho / (rho + 1.0)) + 1.0;
      const double s_lo = e_lo > 0.0 ? std::log(e_lo) : kNegInf;
      const double s_hi = std::isfinite(e_hi) ? std::log(e_hi) : kInf;
      return log_integral_unimodal(psi, s_lo, s_hi, std::log(std::max(peak, 1e-300)));
    }

    case TailKind::SquaredDoubleExp: {
      // v = 0 below level 1; above it, E = exp(s^2) gives a smooth integrand in s.
      double acc = log_exp_mass(e_lo, std::min(e_hi, 1.0));
      if (e_hi > 1.0) {
        const double s_lo = e_lo > 1.0 ? std::sqrt(std::log(e_lo)) : 0.0;
        const double s_hi = std::isfinite(e_hi) ? std::sqrt(std::log(e_hi)) : kInf;
        auto psi = [=](double s) {
          if (s <= 0.0) return kNegInf;
          const double s2 = s * s;
          return t * s - std::exp(s2) + s2 + std::log(2.0 * s);
        };
        const double hint = std::sqrt(std::log(std::max(t, 1.0) + 1.0));
        acc = log_add_exp(acc, log_integral_unimodal(psi, s_lo, s_hi, hint));
      }
      return acc;
    }
  }
  return kNaN;
}

}  // namespace

double log_level_integral(const TailFamily& family, double t, double e_lo, double e_hi) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("t >= 0 required");
  return log_level_integral_impl(family, t, e_lo, e_hi);
}

double cumulant_H(const TailFamily& family, double t) {
  if (family.kind() == TailKind::HardCore) {
    if (!(t >= 0.0)) throw std::domain_error("t >= 0 required");
    return std::log1p(-family.param());
  }
  return log_level_integral(family, t, 0.0, kInf);
}

double truncated_log_moment(const TailFamily& family, double t, double level_max) {
  return log_level_integral(family, t, 0.0, level_max);
}

double cumulant_exponent_G(const TailFamily& family, double theta, double t) {
  if (theta == 0.0 || !(theta > -1.0)) throw std::domain_error("theta > -1 and theta != 0 required");
  return (cumulant_H(family, (1.0 + theta) * t) - (1.0 + theta) * cumulant_H(family, t)) / theta;
}

double rate_I(double y) {
  if (!(y >= 0.0)) throw std::domain_error("rate_I: y >= 0 required");
  // sqrt(1+y^2) - 1 written without cancellation.
  return y * std::asinh(y) - y * y / (std::sqrt(1.0 + y * y) + 1.0);
}

std::string ExponentTable::j_name() const {
  switch (j_kind) {
    case GrowthKind::CumulantH:
      return "H(t)";
    case GrowthKind::Linear:
      return "t";
    case GrowthKind::LogCorrected:
      return "t/(2*sqrt(log(t)))";
    case GrowthKind::HardCorePower:
      return "c2*t^(d/(d+2))";
    case GrowthKind::FrechetScale:
      return "chi*t/alpha_t^2";
  }
  return "";
}

std::string ExponentTable::j_params() const {
  std::ostringstream os;
  os.precision(17);
  switch (j_kind) {
    case GrowthKind::CumulantH:
    case GrowthKind::Linear:
    case GrowthKind::LogCorrected:
      return "";
    case GrowthKind::HardCorePower:
      os << "c2=unknown;exponent=" << static_cast<double>(dim) / (dim + 2.0);
      return os.str();
    case GrowthKind::FrechetScale:
      os << "chi=unknown;nu=" << nu;
      return os.str();
  }
  return "";
}

ExponentTable transition_exponents(const TailFamily& family, int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  ExponentTable e;
  e.family = family;
  e.dim = dim;
  const double rho = family.param();
  switch (family.kind()) {
    case TailKind::Weibull:
      e.gamma1 = 1.0 / (rho - 1.0);
      e.gamma2 = std::pow(2.0, rho / (rho - 1.0)) * e.gamma1;
      e.j_kind = GrowthKind::CumulantH;
      break;
    case TailKind::DoubleExp:
      e.gamma1 = rho;
      e.gamma2 = 2.0 * rho;
      e.j_kind = GrowthKind::Linear;
      break;
    case TailKind::SquaredDoubleExp:
      e.gamma1 = 1.0;
      e.gamma2 = 2.0;
      e.j_kind = GrowthKind::LogCorrected;
      break;
    case TailKind::Frechet:
      e.nu = 1.0 / (dim + 2.0 + 2.0 * rho);
      e.gamma1 = e.nu * e.nu;
      e.gamma2 = std::pow(2.0, 1.0 - e.gamma1) * e.gamma1;
      e.j_kind = GrowthKind::FrechetScale;
      e.j_constant = "chi";
      break;
    case TailKind::HardCore:
      e.gamma1 = 2.0 / (dim + 2.0);
      e.gamma2 = std::pow(2.0, 1.0 - e.gamma1) * e.gamma1;
      e.j_kind = GrowthKind::HardCorePower;
      e.j_constant = "c2";
      e.empirical_only = true;
      break;
  }
  return e;
}

double critical_a(const TailFamily& family, int dim, double gamma) {
  const ExponentTable e = transition_exponents(family, dim);
  if (!(gamma > 0.0 && gamma <= e.gamma1)) {
    std::ostringstream os;
    os << "critical_a: gamma must lie in (0, gamma1 = " << e.gamma1 << "], got " << gamma;
    throw std::domain_error(os.str());
  }
  const double rho = family.param();
  switch (family.kind()) {
    case TailKind::Weibull:
      return rho / (rho - 1.0) * std::pow((rho - 1.0) * gamma, 1.0 / rho) - gamma;
    case TailKind::DoubleExp:
      return gamma * std::exp((gamma - rho) / rho);
    case TailKind::SquaredDoubleExp:
      // third class: rho = 1
      return gamma * std::exp(gamma - 1.0);
    case TailKind::Frechet: {
      const double n2 = e.nu * e.nu;
      return (1.0 - n2) * std::pow(gamma / n2, -n2 / (1.0 - n2)) + gamma;
    }
    case TailKind::HardCore:
      break;
  }
  throw std::domain_error("critical_a: no critical function for hard_core");
}

double frechet_alpha(const TailFamily& family, int dim, double t) {
  if (family.kind() != TailKind::Frechet) throw std::invalid_argument("frechet_alpha needs a frechet family");
  if (!(t > 0.0)) throw std::domain_error("t > 0 required");
  const double d = dim;
  // g(u) with alpha = e^u; increasing in u for the Frechet class.
  auto g = [&](double u) {
    const double s = t * std::exp(-d * u);
    const double k = -cumulant_H(family, s);
    return std::log(k) + (d + 2.0) * u - std::log(t);
  };
  double lo = -1.0, hi = 1.0;
  int guard = 0;
  while (g(lo) > 0.0) {
    lo *= 2.0;
    if (++guard > 60) throw RootFindError("frechet_alpha: no sign change below", lo, hi);
  }
  guard = 0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (++guard > 60) throw RootFindError("frechet_alpha: no sign change above", lo, hi);
  }
  const double lo0 = lo, hi0 = hi;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (!std::isfinite(gm)) throw RootFindError("frechet_alpha: non-finite residual", lo0, hi0);
    (gm < 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double growth_J(const TailFamily& family, int dim, double t) {
  if (!(t > 0.0)) throw std::domain_error("growth_J: t > 0 required");
  switch (family.kind()) {
    case TailKind::Weibull:
      return cumulant_H(family, t);
    case TailKind::DoubleExp:
      return t;
    case TailKind::SquaredDoubleExp:
      if (!(t > std::exp(1.0))) throw std::domain_error("growth_J: t > e required for squared_double_exp");
      return t / (2.0 * std::sqrt(std::log(t)));
    case TailKind::Frechet: {
      const double a = frechet_alpha(family, dim, t);
      return t / (a * a);
    }
    case TailKind::HardCore:
      return std::pow(t, dim / (dim + 2.0));
  }
  return kNaN;
}

}  // namespace brwre
