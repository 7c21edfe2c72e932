#pragma once

#include <stdexcept>

namespace fracfem {

/// Tolerances met by the special-function routines below.
struct SpecialFunctionTolerances {
  double gamma_rel_tol = 1e-13;
  double incomplete_beta_rel_tol = 1e-12;
};

/// log Gamma(x) for x > 0, Lanczos approximation (relative error < 1e-13).
double log_gamma(double x);

/// Gamma(x) for x > 0.
double gamma_fn(double x);

/// Euler beta function B(a, b), a, b > 0.
double beta_fn(double a, double b);

/// Regularized incomplete beta I_x(a, b) by continued fraction, with the
/// symmetric-argument switch at x = (a+1)/(a+b+2).
double reg_inc_beta(double x, double a, double b);

/// Unregularized incomplete beta B(x; a, b) = I_x(a,b) * B(a,b).
double inc_beta(double x, double a, double b);

} // namespace fracfem
