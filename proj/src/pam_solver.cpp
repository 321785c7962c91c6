#include "brwre/pam_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "brwre/tail_analytics.hpp"

namespace brwre {

namespace {

constexpr std::size_t kAutoDenseMax = 400;
constexpr std::size_t kDenseMax = 4000;
constexpr int kKrylovDim = 40;
constexpr long kRkMaxSteps = 2'000'000;

// Scale y so its largest entry is 1; negatives from rounding are cleared.
void renormalize(Eigen::VectorXd& y, double& log_offset) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!(y[i] > 0.0)) y[i] = 0.0;
  const double m = y.size() ? y.maxCoeff() : 0.0;
  if (m > 0.0) {
    y /= m;
    log_offset += std::log(m);
  }
}

MomentField to_field(const BoxDomain& dom, double kappa, double t, const Eigen::VectorXd& y,
                     double log_offset) {
  MomentField f{dom.box, t, kappa, std::vector<double>(dom.box.size(), 0.0), log_offset};
  for (std::size_t a = 0; a < dom.size(); ++a) f.mantissa[dom.active[a]] = y[static_cast<Eigen::Index>(a)];
  return f;
}

void solve_dense(const LatticeOperator& op, double t, Eigen::VectorXd& y, double& log_offset) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lmax = lam.maxCoeff();
  const Eigen::MatrixXd& q = es.eigenvectors();
  const Eigen::VectorXd c = q.transpose() * y;
  const Eigen::VectorXd e = ((lam.array() - lmax) * t).exp().matrix();
  y = q * (e.asDiagonal() * c);
  log_offset += t * lmax;
  renormalize(y, log_offset);
}

void solve_krylov(const LatticeOperator& op, double t, double tol, Eigen::VectorXd& y, double& log_offset) {
  const Eigen::Index n = y.size();
  const int mmax = static_cast<int>(std::min<Eigen::Index>(kKrylovDim, n));
  Eigen::MatrixXd v(n, mmax + 1);
  Eigen::VectorXd w(n);
  double remaining = t;
  double h = t;
  while (remaining > 0.0) {
    const double beta0 = y.norm();
    if (beta0 == 0.0) return;
    v.col(0) = y / beta0;
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(mmax, mmax);
    int m = mmax;
    double beta_last = 0.0;
    for (int j = 0; j < mmax; ++j) {
      op.apply(v.col(j).data(), w.data());
      // full reorthogonalisation, twice
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd coef = v.leftCols(j + 1).transpose() * w;
        w -= v.leftCols(j + 1) * coef;
        if (pass == 0) tri(j, j) = coef[j];
        else tri(j, j) += coef[j];
      }
      const double b = w.norm();
      if (j + 1 < mmax) {
        if (b <= 1e-13 * std::max(1.0, std::abs(tri(j, j)))) {
          m = j + 1;  // invariant subspace: the projection is exact
          beta_last = 0.0;
          break;
        }
        tri(j + 1, j) = tri(j, j + 1) = b;
        v.col(j + 1) = w / b;
      } else {
        beta_last = (m == n) ? 0.0 : b;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri.topLeftCorner(m, m));
    const Eigen::VectorXd& th = es.eigenvalues();
    const Eigen::MatrixXd& s = es.eigenvectors();
    const double thmax = th.maxCoeff();
    const Eigen::VectorXd s0 = s.row(0).transpose();

    h = std::min(h, remaining);
    Eigen::VectorXd u;
    for (;;) {
      u = s * (((th.array() - thmax) * h).exp().matrix().cwiseProduct(s0));
      const double err = beta_last * std::abs(u[m - 1]);
      if (err <= tol * (h / t) * u.norm() || h < 1e-14 * t) {
        if (h < 1e-14 * t) throw std::runtime_error("krylov step size underflow");
        break;
      }
      h *= 0.5;
    }
    y = v.leftCols(m) * u;
    log_offset += h * thmax + std::log(beta0);
    renormalize(y, log_offset);
    remaining -= h;
    if (remaining < 1e-15 * t) remaining = 0.0;
    h *= 2.0;
  }
}

void solve_rk45(const LatticeOperator& op, double t, double tol, Eigen::VectorXd& y, double& log_offset) {
  // Dormand-Prince 5(4) on y' = (A - s I) y, s = largest diagonal entry.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;

  const Eigen::Index n = y.size();
  const double shift = op.max_diag();
  double max_abs_v = 0.0;
  for (double dg : op.diag()) max_abs_v = std::max(max_abs_v, std::abs(dg + op.degree() * op.kappa()));
  auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    op.apply(x.data(), out.data());
    out -= shift * x;
  };
  double vplus = 0.0;
  for (double dg : op.diag()) vplus = std::max(vplus, dg + op.degree() * op.kappa());
  double h = std::min(t, 0.5 / (op.degree() * op.kappa() + vplus + 1e-300));

  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
  f(y, k1);
  double time = 0.0;
  long steps = 0;
  while (time < t) {
    if (++steps > kRkMaxSteps) {
      std::ostringstream os;
      os << "explicit integrator exceeded " << kRkMaxSteps << " steps (max |v| = " << max_abs_v << ")";
      throw StiffnessError(os.str(), max_abs_v);
    }
    h = std::min(h, t - time);
    tmp = y + h * a21 * k1;
    f(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double ymax = std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
    double en = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = tol * (std::max(std::abs(y[i]), std::abs(ynew[i])) + 1e-8 * ymax) + 1e-300;
      en = std::max(en, std::abs(err[i]) / sc);
    }
    if (en <= 1.0) {
      time += h;
      log_offset += shift * h;
      y = ynew;
      k1 = k7;
      const double m = y.cwiseAbs().maxCoeff();
      if (m > 0.0 && (m > M_E || m < 1.0 / M_E)) {
        y /= m;
        k1 /= m;
        log_offset += std::log(m);
      }
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= fac;
    if (h < 1e-14 * t) {
      std::ostringstream os;
      os << "explicit integrator step underflow (max |v| = " << max_abs_v << ")";
      throw StiffnessError(os.str(), max_abs_v);
    }
  }
  renormalize(y, log_offset);
}

}  // namespace

SolveMethod solve_method_from_name(const std::string& name) {
  if (name == "auto") return SolveMethod::Auto;
  if (name == "dense-eig") return SolveMethod::DenseEig;
  if (name == "krylov" || name == "krylov-expm") return SolveMethod::Krylov;
  if (name == "rk45") return SolveMethod::RK45;
  throw std::invalid_argument("unknown solve method '" + name + "' (auto, dense-eig, krylov, rk45)");
}

std::string solve_method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::Auto:
      return "auto";
    case SolveMethod::DenseEig:
      return "dense-eig";
    case SolveMethod::Krylov:
      return "krylov";
    case SolveMethod::RK45:
      return "rk45";
  }
  return "auto";
}

double MomentField::log_value(std::size_t i) const {
  return mantissa[i] > 0.0 ? std::log(mantissa[i]) + log_offset : kNegInf;
}

double MomentField::log_sum() const {
  double s = 0.0;
  for (double m : mantissa) s += m;
  return s > 0.0 ? std::log(s) + log_offset : kNegInf;
}

MomentField solve_truncated(const Environment& env, const Box& box, double kappa, double t,
                            SolveMethod method, double tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be finite and >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  const BoxDomain dom = make_domain(env, box);
  const std::size_t n = dom.size();
  Eigen::VectorXd y = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  double log_offset = 0.0;
  if (n == 0 || t == 0.0) return to_field(dom, kappa, t, y, 0.0);

  if (kappa == 0.0) {
    std::vector<double> vt(n);
    for (std::size_t a = 0; a < n; ++a) vt[a] = env.v(box.site(dom.active[a])) * t;
    log_offset = *std::max_element(vt.begin(), vt.end());
    for (std::size_t a = 0; a < n; ++a) y[static_cast<Eigen::Index>(a)] = std::exp(vt[a] - log_offset);
    return to_field(dom, kappa, t, y, log_offset);
  }

  const LatticeOperator op(env, dom, kappa);
  if (method == SolveMethod::Auto) method = n <= kAutoDenseMax ? SolveMethod::DenseEig : SolveMethod::Krylov;
  switch (method) {
    case SolveMethod::DenseEig:
      if (n > kDenseMax)
        throw std::invalid_argument("dense-eig limited to " + std::to_string(kDenseMax) + " active sites");
      solve_dense(op, t, y, log_offset);
      break;
    case SolveMethod::Krylov:
      solve_krylov(op, t, tol, y, log_offset);
      break;
    case SolveMethod::RK45:
      solve_rk45(op, t, tol, y, log_offset);
      break;
    case SolveMethod::Auto:
      break;
  }
  return to_field(dom, kappa, t, y, log_offset);
}

int truncation_radius(int dim, double kappa, double t, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tol must lie in (0, 1)");
  if (!(kappa > 0.0 && t > 0.0)) return 0;
  const double s = 2.0 * kappa * t;
  const double target = std::log(tol) - dim * s;
  auto ok = [&](long r) { return -s * rate_I(static_cast<double>(r) / s) < target; };
  long hi = 1;
  while (!ok(hi)) {
    hi *= 2;
    if (hi > (1L << 40)) throw std::overflow_error("truncation radius overflow");
  }
  long lo = hi / 2;  // ok(lo) false or lo == 0
  if (lo < 1) return 1;
  while (hi - lo > 1) {
    const long mid = (lo + hi) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return static_cast<int>(hi);
}

UntruncatedMoment solve_untruncated(const Environment& env, const Site& x, double kappa, double t,
                                    double tol, SolveMethod method) {
  if (!env.window().contains(x)) throw WindowTooSmall("site lies outside the environment window",
                                                       sup_distance(x, Site{}, env.dim()));
  if (env.hard_core(x)) return {0.0, 0.0, 0};
  if (kappa == 0.0 || t == 0.0) return {1.0, env.v(x) * t, 0};
  const int r = truncation_radius(env.dim(), kappa, t, tol);
  const int needed = sup_distance(x, env.window().center(), env.dim()) + r;
  if (needed > env.radius()) {
    std::ostringstream os;
    os << "truncation radius " << r << " needs an environment window of radius " << needed
       << " (have " << env.radius() << ")";
    throw WindowTooSmall(os.str(), needed);
  }
  const MomentField f = solve_truncated(env, Box(env.dim(), x, r), kappa, t, method, tol);
  const double m = f.mantissa[f.box.index(x)];
  return {m, f.log_offset, r};
}

EmpiricalAverage empirical_average(const Environment& env, int L, double kappa, double t, double tol,
                                   SolveMethod method) {
  if (L < 0) throw std::invalid_argument("L must be >= 0");
  const int d = env.dim();
  const double log_count = d * std::log(2.0 * L + 1.0);
  const int r = (kappa == 0.0 || t == 0.0) ? 0 : truncation_radius(d, kappa, t, tol);
  if (L + r > env.radius()) {
    std::ostringstream os;
    os << "empirical average over Lambda_" << L << " with truncation radius " << r
       << " needs an environment window of radius " << L + r << " (have " << env.radius() << ")";
    throw WindowTooSmall(os.str(), L + r);
  }
  const Box inner = Box::centered(d, L);
  if (r == 0) {
    std::vector<double> lv(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i) {
      const double v = env.v(inner.site(i));
      lv[i] = v == kNegInf ? kNegInf : v * t;
    }
    return {log_sum_exp(lv) - log_count, 0};
  }
  const MomentField f = solve_truncated(env, Box::centered(d, L + r), kappa, t, method, tol);
  double s = 0.0;
  for (std::size_t i = 0; i < inner.size(); ++i) s += f.mantissa[f.box.index(inner.site(i))];
  return {s > 0.0 ? std::log(s) + f.log_offset - log_count : kNegInf, r};
}

}  // namespace brwre
