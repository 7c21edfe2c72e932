#pragma once

#include <functional>

#include "fracfem/solve.hpp"

namespace fracfem {

/// Least-squares fit of log(error) against log(scale).
struct RateFit {
  std::vector<double> scales;
  std::vector<double> errors;
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // RMS residual of the fit in log space
  double r_squared = 1;
};

RateFit fit_rate(const std::vector<double>& scales, const std::vector<double>& errors);

/// || u_h - exact ||_{L2(Omega)} by per-element Gauss quadrature.
double l2_error_omega(const DiscreteSolution& u, const std::function<double(double)>& exact,
                      int quad_order = 10);
double l2_error_omega(const DiscreteSolution& u,
                      const std::function<double(double, double)>& exact, int quad_order = 8);

struct HsError {
  double l2 = 0;
  double seminorm = 0; // Gagliardo seminorm |e|_{H^s(Omega)}
  double full = 0;     // (l2^2 + seminorm^2)^{1/2}
};

/// H^s(Omega) error of a 1D solution; the error function is sampled at
/// quadrature points and singular element pairs are handled by graded Duffy
/// quadrature. Target relative accuracy ~1e-4.
HsError hs_error_omega_1d(const DiscreteSolution& u, const std::function<double(double)>& exact,
                          double s);

/// Mean of u_h over Omega computed through mass-matrix row sums.
double omega_mean(const DiscreteSolution& u);

/// Truncation study: solve on Lambda_H for each H with fixed h, report the
/// decay exponent of successive L2(Omega) differences.
struct TruncationProblem {
  SourceSpec f;
  FluxSpec g;
  FractionalParams params;
};
struct TruncationResult {
  std::vector<double> H_values;      // H_{n+1} for each difference
  std::vector<double> differences;   // ||u^{H_n} - u^{H_{n+1}}||_{L2(Omega)}
  RateFit fit;                       // slope of log(diff) vs log(H); exponent c = -slope
  double exponent_c = 0;
};
TruncationResult truncation_study(const TruncationProblem& problem,
                                  const std::vector<double>& H_list, double h,
                                  const AssemblyOptions& opts = {});

/// Limit of the solution at infinity predicted from the declared tail decay.
struct DecayDiagnostics {
  double tail_value = 0;      // computed U_{N+1}
  double predicted_limit = 0; // kappa / (C_{d,s} |Omega|) + mean
  bool divergent = false;     // g |x|^{d+2s} -> infinity
};
DecayDiagnostics decay_diagnostics(const DiscreteSolution& u, const FluxSpec& g);

/// Averaging regions of the broken quasi-interpolation operator.
struct InterpRegions {
  std::vector<double> radius;      // ball radius per node (0.99 x star clearance)
  std::vector<double> measure;     // |R_i|
  std::vector<bool> clipped;       // boundary nodes average over B_i intersect Omega
};
InterpRegions build_interp_regions(const Mesh1D& mesh);
InterpRegions build_interp_regions(const TriMesh2D& mesh);

/// I_h v: nodal averages over balls (clipped to Omega at boundary nodes),
/// zero tail coefficient.
DiscreteSolution quasi_interpolate(const std::function<double(double)>& v,
                                   std::shared_ptr<const Mesh1D> mesh,
                                   const FractionalParams& params);
DiscreteSolution quasi_interpolate(const std::function<double(double, double)>& v,
                                   std::shared_ptr<const TriMesh2D> mesh,
                                   const FractionalParams& params);

} // namespace fracfem
