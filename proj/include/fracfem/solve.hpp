#pragma once

#include <memory>

#include "fracfem/assembly.hpp"

namespace fracfem {

/// Coefficient vector of length N+1; the last entry is the constant value of
/// the solution on the complement of the computational domain.
struct DiscreteSolution {
  Vector coeff;
  std::shared_ptr<const Mesh1D> mesh1d;
  std::shared_ptr<const TriMesh2D> mesh2d;
  FractionalParams params;

  int dim() const { return mesh1d ? 1 : 2; }
  double tail_value() const { return coeff.back(); }
  double evaluate(double x) const;           // 1D
  double evaluate(double x, double y) const; // 2D
};

struct SolveOptions {
  bool use_cg = false; // conjugate gradient instead of the direct factorization
  double cg_tol = 1e-10;
};

/// Direct solve of (K + alpha M) U = F + G; requires alpha > 0.
DiscreteSolution solve_stationary(const LinearSystem& system, const SolveOptions& opts = {});

struct HeatConfig {
  double dt = 0;
  double t_final = 0;
  SourceSpec u0;   // initial condition on Omega
  int stride = 1;  // keep every stride-th step
};

struct HeatResult {
  std::vector<double> times;                // times of the stored states (t=0 first)
  std::vector<DiscreteSolution> states;
};

/// Backward Euler for u_t + (-Lap)^s u = 0 with homogeneous nonlocal Neumann
/// flux; each step solves (M/dt + K) U^{n+1} = M U^n / dt.
HeatResult solve_heat(std::shared_ptr<const Mesh1D> mesh, const FractionalParams& params,
                      const HeatConfig& cfg, const AssemblyOptions& opts = {});

} // namespace fracfem
