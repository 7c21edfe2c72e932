#pragma once

#include <functional>
#include <memory>

#include "fracfem/linalg.hpp"
#include "fracfem/mesh.hpp"
#include "fracfem/params.hpp"
#include "fracfem/quadrature.hpp"

namespace fracfem {

/// Right-hand side f on Omega.
struct SourceSpec {
  enum class Kind { constant, callable, grid } kind = Kind::constant;
  double value = 0;
  std::function<double(double)> fn1;
  std::function<double(double, double)> fn2;
  std::vector<double> grid_values; // nodal coefficients
  int quad_order = 0;

  static SourceSpec constant(double c) {
    SourceSpec s;
    s.value = c;
    return s;
  }
  static SourceSpec callable_1d(std::function<double(double)> f) {
    SourceSpec s;
    s.kind = Kind::callable;
    s.fn1 = std::move(f);
    return s;
  }
  static SourceSpec callable_2d(std::function<double(double, double)> f) {
    SourceSpec s;
    s.kind = Kind::callable;
    s.fn2 = std::move(f);
    return s;
  }
  static SourceSpec grid(std::vector<double> values) {
    SourceSpec s;
    s.kind = Kind::grid;
    s.grid_values = std::move(values);
    return s;
  }
};

/// Nonlocal flux density g on the complement of Omega.
struct FluxSpec {
  enum class Kind { zero, manufactured_1d, power_law, callable } kind = Kind::zero;
  double amplitude = 0;      // power law: g = -A |x|^{-(d+p)}
  double decay_exponent = 0; // p
  std::function<double(double)> fn1;
  std::function<double(double, double)> fn2;
  TailSpec tail;

  static FluxSpec zero() { return {}; }
  static FluxSpec manufactured() {
    FluxSpec g;
    g.kind = Kind::manufactured_1d;
    return g;
  }
  static FluxSpec power_law(double A, double p) {
    FluxSpec g;
    g.kind = Kind::power_law;
    g.amplitude = A;
    g.decay_exponent = p;
    g.tail = TailSpec::power_law(A, p);
    return g;
  }
  static FluxSpec callable_1d(std::function<double(double)> f, TailSpec tail) {
    FluxSpec g;
    g.kind = Kind::callable;
    g.fn1 = std::move(f);
    g.tail = std::move(tail);
    return g;
  }
  static FluxSpec callable_2d(std::function<double(double, double)> f, TailSpec tail) {
    FluxSpec g;
    g.kind = Kind::callable;
    g.fn2 = std::move(f);
    g.tail = std::move(tail);
    return g;
  }
};

struct AssemblyOptions {
  int quad_order = 0;   // 0 = defaults per contact class
  bool parallel = true; // OpenMP kernels; results are thread-count independent
};

/// Discrete system (K + alpha M) U = F + G of size (N+1), tail DOF last.
struct LinearSystem {
  DenseMatrix stiffness;
  DenseMatrix mass;
  Vector load;
  FractionalParams params;
  std::shared_ptr<const Mesh1D> mesh1d;
  std::shared_ptr<const TriMesh2D> mesh2d;
  int n_dof() const { return stiffness.rows; }
};

/// The manufactured flux of the 1D convergence study,
///   g(x) = -C_{1,s} c_s int_{-1}^1 (1-y^2)^s |x-y|^{-1-2s} dy,  |x| > 1.
double manufactured_flux_1d(double x, double s);

DenseMatrix assemble_stiffness(const Mesh1D& mesh, const FractionalParams& params,
                               const AssemblyOptions& opts = {});
DenseMatrix assemble_stiffness(const TriMesh2D& mesh, const FractionalParams& params,
                               const AssemblyOptions& opts = {});

/// Plain per-pair reference assembly, kept for testing the optimized kernels.
DenseMatrix assemble_stiffness_serial(const Mesh1D& mesh, const FractionalParams& params,
                                      int quad_order = 0);
DenseMatrix assemble_stiffness_serial(const TriMesh2D& mesh, const FractionalParams& params,
                                      int quad_order = 0);

DenseMatrix assemble_mass(const Mesh1D& mesh);
DenseMatrix assemble_mass(const TriMesh2D& mesh);

Vector assemble_load(const Mesh1D& mesh, const SourceSpec& f, const FluxSpec& g,
                     const FractionalParams& params, const AssemblyOptions& opts = {});
Vector assemble_load(const TriMesh2D& mesh, const SourceSpec& f, const FluxSpec& g,
                     const FractionalParams& params, const AssemblyOptions& opts = {});

LinearSystem assemble_system(std::shared_ptr<const Mesh1D> mesh, const SourceSpec& f,
                             const FluxSpec& g, const FractionalParams& params,
                             const AssemblyOptions& opts = {});
LinearSystem assemble_system(std::shared_ptr<const TriMesh2D> mesh, const SourceSpec& f,
                             const FluxSpec& g, const FractionalParams& params,
                             const AssemblyOptions& opts = {});

} // namespace fracfem
