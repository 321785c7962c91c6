#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "brwre/environment.hpp"

namespace brwre {

/// U_w = box minus hard-core sites, with a compact numbering of its sites.
struct BoxDomain {
  Box box;
  std::vector<std::size_t> active;  ///< box index of each active site
  std::vector<long> local;          ///< box index -> active index, or -1

  std::size_t size() const { return active.size(); }
};

/// Box must lie inside the environment window.
BoxDomain make_domain(const Environment& env, const Box& box);

/// kappa*Delta + v on U_w with zero Dirichlet data outside U_w.
/// Diagonal -2 d kappa + v(x); off-diagonal kappa between active neighbours.
class LatticeOperator {
 public:
  LatticeOperator(const Environment& env, const BoxDomain& dom, double kappa);

  std::size_t size() const { return diag_.size(); }
  int degree() const { return degree_; }
  double kappa() const { return kappa_; }
  const std::vector<double>& diag() const { return diag_; }
  double max_diag() const;
  double min_diag() const;
  /// Neighbour k of active site i, or -1.
  long neighbour(std::size_t i, int k) const { return nbr_[i * degree_ + k]; }

  void apply(const double* x, double* y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dense() const;

 private:
  double kappa_;
  int degree_;
  std::vector<double> diag_;
  std::vector<long> nbr_;
};

}  // namespace brwre
