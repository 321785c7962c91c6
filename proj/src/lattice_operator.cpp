#include "brwre/lattice_operator.hpp"

#include <algorithm>
#include <stdexcept>

namespace brwre {

BoxDomain make_domain(const Environment& env, const Box& box) {
  if (!env.window().contains(box)) throw std::invalid_argument("box does not fit inside the environment window");
  BoxDomain dom{box, {}, std::vector<long>(box.size(), -1)};
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (env.hard_core(box.site(i))) continue;
    dom.local[i] = static_cast<long>(dom.active.size());
    dom.active.push_back(i);
  }
  return dom;
}

LatticeOperator::LatticeOperator(const Environment& env, const BoxDomain& dom, double kappa)
    : kappa_(kappa), degree_(2 * dom.box.dim()) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  const int d = dom.box.dim();
  const std::size_t n = dom.size();
  diag_.resize(n);
  nbr_.assign(n * degree_, -1);
  for (std::size_t a = 0; a < n; ++a) {
    const Site s = dom.box.site(dom.active[a]);
    diag_[a] = -2.0 * d * kappa + env.v(s);
    for (int k = 0; k < d; ++k) {
      for (int sgn : {-1, 1}) {
        Site y = s;
        y[k] += sgn;
        if (!dom.box.contains(y)) continue;
        nbr_[a * degree_ + 2 * k + (sgn > 0)] = dom.local[dom.box.index(y)];
      }
    }
  }
}

double LatticeOperator::max_diag() const { return *std::max_element(diag_.begin(), diag_.end()); }
double LatticeOperator::min_diag() const { return *std::min_element(diag_.begin(), diag_.end()); }

void LatticeOperator::apply(const double* x, double* y) const {
  const std::size_t n = diag_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const long* nb = &nbr_[i * degree_];
    for (int k = 0; k < degree_; ++k)
      if (nb[k] >= 0) acc += x[nb[k]];
    y[i] = diag_[i] * x[i] + kappa_ * acc;
  }
}

Eigen::VectorXd LatticeOperator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  apply(x.data(), y.data());
  return y;
}

Eigen::MatrixXd LatticeOperator::dense() const {
  const std::size_t n = diag_.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = diag_[i];
    for (int k = 0; k < degree_; ++k)
      if (nbr_[i * degree_ + k] >= 0) a(i, nbr_[i * degree_ + k]) = kappa_;
  }
  return a;
}

}  // namespace brwre
