#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fracfem/mesh.hpp"

namespace fracfem {

/// Nodes/weights on [-1,1] (or [0,1] for the *_01 variants).
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  int exactness_degree = 0;
};

/// n-point Gauss-Legendre rule on [-1,1], exact for degree <= 2n-1. 1 <= n <= 64.
GaussRule1D gauss_legendre(int n);

/// Rule for weight (1-x)^a (1+x)^b on [-1,1] (Golub-Welsch).
GaussRule1D gauss_jacobi(int n, double a, double b);

/// Rule for the symmetric weight (1-y^2)^s on [-1,1].
GaussRule1D gauss_jacobi_symmetric(int n, double s);

/// Rule for weight t^beta on [0,1].
GaussRule1D gauss_jacobi_01(int n, double beta);

/// Symmetric rule on the reference triangle (0,0),(1,0),(0,1) built as a
/// conical product; exact for degree <= 2n-1, n^2 points, weights sum to 1/2.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int exactness_degree = 0;
};
TriangleRule triangle_rule(int n);

/// Adaptive 1D integration (Gauss 7/15 pair with bisection).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 1e-14, int max_depth = 52);

/// Composite Gauss with dyadic grading toward both endpoints; robust for
/// endpoint branch singularities of integrable type.
double integrate_graded(const std::function<double(double)>& f, double a, double b,
                        int levels = 28, int n_gauss = 12);

// -------------------------------------------------------------------------
// Appendix-type kernel integrals
// -------------------------------------------------------------------------

struct AppendixIntegrals {
  double i1, i2, i3, i4;
};

/// The four inner integrals of the singular boundary-flux computation,
/// evaluated from their regularized (z-substituted) forms; abs error <= 1e-10.
AppendixIntegrals appendix_integrals(double eta, double s);

struct FluxMoments {
  double m_hat; // against phi(x) = 1 - (x-1)/h on [1, 1+h]
  double m_far; // against phi(x) = (x-1)/h
};

/// Moments of the manufactured flux over the first exterior element [1, 1+h],
/// including the full -C_{1,s} c_s prefactor of g.
FluxMoments boundary_flux_moments_1d(double h, double s);

// -------------------------------------------------------------------------
// Element-pair integrals of the kernel |x-y|^{-d-2s}
// -------------------------------------------------------------------------

/// Restriction of a (global) basis function to one element of a pair.
enum class Trace1D : int { zero = 0, hat_left = 1, hat_right = 2, one = 3 };
struct PairTrace1D {
  Trace1D on_a = Trace1D::zero;
  Trace1D on_b = Trace1D::zero;
};

/// Integral over elem_a x elem_b of
///   (f_i(x) - f_i(y)) (f_j(x) - f_j(y)) / |x-y|^{1+2s}
/// without the C_{d,s}/2 factor. Identical and adjacent elements use
/// Duffy-type splits with the radial direction integrated in closed form.
double pair_integral_1d(double a0, double a1, double b0, double b1, double s,
                        PairTrace1D fi, PairTrace1D fj, int order = 0);

/// Interaction block of one triangle pair: entries for every basis function
/// attached to the union of the two vertex sets (plus none for the tail; tail
/// columns are assembled from tail_kernel_moments).
struct PairBlock2D {
  std::array<int, 6> nodes{};  // global node ids, first n_nodes valid
  int n_nodes = 0;
  int contact = 0;             // 3 identical, 2 shared edge, 1 shared vertex, 0 disjoint
  std::array<std::array<double, 6>, 6> entry{};
};
PairBlock2D pair_integral_2d(const TriMesh2D& mesh, int ta, int tb, double s, int order = 0);

// -------------------------------------------------------------------------
// Unbounded-domain (tail) integrals
// -------------------------------------------------------------------------

/// int_{y not in [lo,hi]} |x-y|^{-1-2s} dy for x inside (lo,hi); closed form.
double tail_weight_1d(double x, double s, double lo, double hi);

/// int_{|y|>R} |x-y|^{-2-2s} dy for |x| = r < R; radial Gauss-Jacobi times
/// an angular rule.
double tail_weight_2d(double r, double s, double R);

/// Per-local-basis moments int_elem phi_i(x) * tailweight(x) dx, last entry
/// for phi == 1. 1D: {left hat, right hat, one}; 2D: {v0, v1, v2, one}.
std::array<double, 3> tail_kernel_moments_1d(double e0, double e1, double s, double lo, double hi);
std::array<double, 4> tail_kernel_moments_2d(const TriMesh2D& mesh, int t, double s, double R);

/// Declarative tail of a flux density g on the un-meshed region.
struct TailSpec {
  enum class Kind { zero, power_law, generic } kind = Kind::zero;
  double amplitude = 0;        // A in g ~ -A |x|^{-d-p}
  double decay_exponent = 0;   // p > 0
  double adaptive_tol = 1e-10;
  std::function<double(double)> radial; // generic: g as a function of |x|

  static TailSpec zero_tail() { return {}; }
  static TailSpec power_law(double A, double p);
  static TailSpec generic(std::function<double(double)> radial, double tol = 1e-10);
};

/// int over the complement of Lambda of g; closed form for power laws,
/// adaptive after the substitution x -> 1/t otherwise.
double tail_flux_integral(const TailSpec& tail, double ext_radius, int d);

} // namespace fracfem
