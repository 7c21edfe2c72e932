#pragma once

// Brute-force reference integrators, independent of the quadrature module's
// Duffy/exact-radial computation paths. Test code only.

#include <functional>

#include "fracfem/mesh.hpp"
#include "fracfem/quadrature.hpp"

namespace oracle {

/// Recursive adaptive Simpson.
double adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                int max_depth = 60);

/// 1D pair integral of (fi(x)-fi(y))(fj(x)-fj(y)) |x-y|^{-1-2s} over two
/// elements of the same mesh, any contact class.
double pair_1d(double a0, double a1, double b0, double b1, double s, fracfem::PairTrace1D fi,
               fracfem::PairTrace1D fj, double tol = 1e-10);

/// 2D pair integral for the hat functions of nodes p and q (global ids).
double pair_2d(const fracfem::TriMesh2D& mesh, int ta, int tb, int node_p, int node_q, double s,
               double tol = 1e-7);

/// int_elem phi(x) int_{|y|>L or y outside [lo,hi]} |x-y|^{-d-2s} dy dx in 1D.
double tail_moment_1d(double e0, double e1, int local, double s, double lo, double hi,
                      double tol = 1e-10);

/// int_{|y| > R} |x-y|^{-2-2s} dy for a point at radius r < R.
double tail_weight_2d(double r, double s, double R, double tol = 1e-9);

/// Covariogram |T cap (T+z)| by polygon clipping.
double tri_covariogram(const fracfem::TriMesh2D& mesh, int t, double zx, double zy);

} // namespace oracle
