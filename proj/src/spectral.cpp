#include "brwre/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "brwre/lattice_operator.hpp"
#include "brwre/log_math.hpp"
#include "brwre/pam_solver.hpp"

namespace brwre {

namespace {

constexpr std::size_t kDenseMax = 4000;
constexpr long kPowerMaxIter = 5'000'000;

}  // namespace

SpectrumSlice principal_eigen(const Environment& env, const Box& box, double kappa, int top_k) {
  const BoxDomain dom = make_domain(env, box);
  const std::size_t n = dom.size();
  if (n == 0) throw std::invalid_argument("principal_eigen: empty active set");
  if (top_k < 1) top_k = 1;
  const LatticeOperator op(env, dom, kappa);

  SpectrumSlice out;
  out.box = box;
  out.kappa = kappa;
  out.active_sites = n;
  Eigen::VectorXd psi(static_cast<Eigen::Index>(n));
  double lambda0 = 0.0;

  if (n <= kDenseMax) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    const auto& lam = es.eigenvalues();  // ascending
    const Eigen::Index nn = lam.size();
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(top_k, nn); ++k)
      out.eigenvalues.push_back(lam[nn - 1 - k]);
    psi = es.eigenvectors().col(nn - 1);
    lambda0 = lam[nn - 1];
  } else {
    out.dense = false;
    // Gershgorin: the spectrum lies above min diag - 2 d kappa, so the shift
    // makes every eigenvalue of A + cI nonnegative.
    const double c = -(op.min_diag() - op.degree() * kappa);
    psi.setOnes();
    psi.normalize();
    Eigen::VectorXd w(psi.size());
    long it = 0;
    for (;; ++it) {
      w = op.apply(psi);
      lambda0 = psi.dot(w);
      const double res = (w - lambda0 * psi).norm();
      if (res <= 1e-10) break;
      if (it >= kPowerMaxIter) throw std::runtime_error("power iteration did not converge");
      psi = w + c * psi;
      psi.normalize();
    }
    out.eigenvalues.push_back(lambda0);
  }
  if (psi.sum() < 0.0) psi = -psi;
  out.residual = (op.apply(psi) - lambda0 * psi).norm();
  out.psi0.assign(box.size(), 0.0);
  for (std::size_t a = 0; a < n; ++a) out.psi0[dom.active[a]] = psi[static_cast<Eigen::Index>(a)];
  return out;
}

SandwichReport verify_sandwich(const Environment& env, const Box& box, double kappa, double t) {
  const SpectrumSlice s = principal_eigen(env, box, kappa, 1);
  const MomentField m = solve_truncated(env, box, kappa, t, SolveMethod::DenseEig);
  double log_max = kNegInf;
  for (std::size_t i = 0; i < m.box.size(); ++i) log_max = std::max(log_max, m.log_value(i));
  SandwichReport r;
  r.lambda0 = s.eigenvalues.front();
  r.active_sites = s.active_sites;
  r.t = t;
  r.lower_margin = m.log_sum() - t * r.lambda0;
  r.upper_margin = 0.5 * std::log(static_cast<double>(s.active_sites)) + t * r.lambda0 - log_max;
  return r;
}

}  // namespace brwre
