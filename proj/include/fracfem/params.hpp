#pragma once

#include <stdexcept>

namespace fracfem {

/// Normalization constant C_{d,s} = 2^{2s} s Gamma(s + d/2) / (pi^{d/2} Gamma(1-s))
/// of the integral fractional Laplacian.
double normalization_constant(int d, double s);

/// c_s = sqrt(pi) / (2^{2s} Gamma((1+2s)/2) Gamma(1+s)), the constant in the
/// explicit solution (1 - x^2)^s of the unit-ball Dirichlet problem.
double dirichlet_constant(double s);

/// Fractional order, dimension, reaction coefficient and kernel constant shared
/// by every module.
struct FractionalParams {
  int d = 1;          // space dimension, 1 or 2
  double s = 0.5;     // fractional order in (0,1)
  double alpha = 1.0; // reaction coefficient, >= 0
  double c_norm = 0;  // C_{d,s}

  FractionalParams() = default;
  FractionalParams(int d_, double s_, double alpha_)
      : d(d_), s(s_), alpha(alpha_), c_norm(normalization_constant(d_, s_)) {
    if (alpha_ < 0.0) throw std::invalid_argument("FractionalParams: alpha must be >= 0");
  }
};

} // namespace fracfem
