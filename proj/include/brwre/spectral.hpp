#pragma once

#include <vector>

#include "brwre/environment.hpp"

namespace brwre {

/// Top of the spectrum of kappa*Delta + v on U_w (Dirichlet outside).
struct SpectrumSlice {
  Box box;
  double kappa = 0.0;
  std::size_t active_sites = 0;
  std::vector<double> eigenvalues;  ///< lambda_0 >= lambda_1 >= ...
  std::vector<double> psi0;         ///< on box sites, 0 on hard core, unit norm, sum > 0
  double residual = 0.0;            ///< ||(A - lambda_0) psi0||_2
  bool dense = true;
};

/// Dense symmetric solve for |U| <= 4000, shifted power iteration beyond
/// (then only lambda_0 is returned). Throws on an empty active set.
SpectrumSlice principal_eigen(const Environment& env, const Box& box, double kappa, int top_k = 4);

struct SandwichReport {
  double lambda0 = 0.0;
  std::size_t active_sites = 0;
  double t = 0.0;
  /// log sum_z m~(z,t) - t lambda0 (lower bound requires >= 0)
  double lower_margin = 0.0;
  /// log sqrt|U| + t lambda0 - max_x log m~(x,t) (upper bound requires >= 0)
  double upper_margin = 0.0;
  bool lower_ok() const { return lower_margin >= 0.0; }
  bool upper_ok() const { return upper_margin >= 0.0; }
};

SandwichReport verify_sandwich(const Environment& env, const Box& box, double kappa, double t);

}  // namespace brwre
