#include "fracfem/params.hpp"

#include <cmath>
#include <numbers>

#include "fracfem/special_functions.hpp"

namespace fracfem {

double normalization_constant(int d, double s) {
  if (d != 1 && d != 2) throw std::invalid_argument("normalization_constant: d must be 1 or 2");
  if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("normalization_constant: s must lie in (0,1)");
  const double lg = 2.0 * s * std::numbers::ln2 + std::log(s) + log_gamma(s + 0.5 * d) -
                    0.5 * d * std::log(std::numbers::pi) - log_gamma(1.0 - s);
  return std::exp(lg);
}

double dirichlet_constant(double s) {
  if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("dirichlet_constant: s must lie in (0,1)");
  const double lg = 0.5 * std::log(std::numbers::pi) - 2.0 * s * std::numbers::ln2 -
                    log_gamma(0.5 + s) - log_gamma(1.0 + s);
  return std::exp(lg);
}

} // namespace fracfem
