#include "fracfem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fracfem/params.hpp"
#include "fracfem/special_functions.hpp"

namespace fracfem {

namespace {

// Eigenvalues and first eigenvector components of a symmetric tridiagonal
// matrix (implicit-shift QL). d: diagonal, e: sub-diagonal (e[0..n-2]).
void tridiag_eigen(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.resize(n, 0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-16 * dd) break;
      }
      if (m == l) break;
      if (++iter > 60) throw std::runtime_error("tridiag_eigen: no convergence");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = z[i + 1];
        z[i + 1] = s * z[i] + c * f;
        z[i] = c * z[i] - s * f;
      }
      if (r == 0.0 && m - 1 >= l) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

GaussRule1D golub_welsch_jacobi(int n, double a, double b) {
  std::vector<double> diag(n), off(n, 0.0), z(n, 0.0);
  z[0] = 1.0;
  const double apb = a + b;
  diag[0] = (b - a) / (apb + 2.0);
  for (int k = 1; k < n; ++k) {
    const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
    diag[k] = (b * b - a * a) / den;
  }
  for (int k = 1; k < n; ++k) {
    double b2;
    if (k == 1)
      b2 = 4.0 * (1.0 + a) * (1.0 + b) / ((apb + 2.0) * (apb + 2.0) * (apb + 3.0));
    else
      b2 = 4.0 * k * (k + a) * (k + b) * (k + apb) /
           ((2.0 * k + apb) * (2.0 * k + apb) * (2.0 * k + apb + 1.0) * (2.0 * k + apb - 1.0));
    off[k - 1] = std::sqrt(b2);
  }
  tridiag_eigen(diag, off, z);
  const double mu0 = std::exp((apb + 1.0) * std::numbers::ln2 + log_gamma(a + 1.0) +
                              log_gamma(b + 1.0) - log_gamma(apb + 2.0));
  GaussRule1D rule;
  rule.exactness_degree = 2 * n - 1;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return diag[i] < diag[j]; });
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.points[i] = diag[idx[i]];
    rule.weights[i] = mu0 * z[idx[i]] * z[idx[i]];
  }
  return rule;
}

std::mutex g_rule_mutex;

} // namespace

GaussRule1D gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n must be in [1,64]");
  static std::map<int, GaussRule1D> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, golub_welsch_jacobi(n, 0.0, 0.0)).first;
  return it->second;
}

GaussRule1D gauss_jacobi(int n, double a, double b) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_jacobi: n must be in [1,64]");
  if (a <= -1.0 || b <= -1.0) throw std::invalid_argument("gauss_jacobi: exponents must be > -1");
  static std::map<std::tuple<int, double, double>, GaussRule1D> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto key = std::make_tuple(n, a, b);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, golub_welsch_jacobi(n, a, b)).first;
  return it->second;
}

GaussRule1D gauss_jacobi_symmetric(int n, double s) {
  if (!(s > 0.0) || !(s < 1.0))
    throw std::invalid_argument("gauss_jacobi_symmetric: s must lie in (0,1)");
  return gauss_jacobi(n, s, s);
}

GaussRule1D gauss_jacobi_01(int n, double beta) {
  // int_0^1 t^beta f(t) dt = 2^{-beta-1} int_{-1}^1 (1+x)^beta f((1+x)/2) dx
  GaussRule1D r = gauss_jacobi(n, 0.0, beta);
  const double scale = std::pow(2.0, -beta - 1.0);
  for (int i = 0; i < n; ++i) {
    r.points[i] = 0.5 * (1.0 + r.points[i]);
    r.weights[i] *= scale;
  }
  return r;
}

TriangleRule triangle_rule(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("triangle_rule: n must be in [1,64]");
  // conical product: x = u, y = v(1-u); Jacobian (1-u) absorbed by a Jacobi rule
  GaussRule1D ru = gauss_jacobi(n, 1.0, 0.0);
  GaussRule1D rv = gauss_legendre(n);
  TriangleRule rule;
  rule.exactness_degree = 2 * n - 1;
  rule.points.reserve(static_cast<size_t>(n) * n);
  rule.weights.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + ru.points[i]);
    const double wu = ru.weights[i] * 0.25; // maps weight (1-x) on [-1,1] to (1-u) du on [0,1]
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (1.0 + rv.points[j]);
      const double wv = rv.weights[j] * 0.5;
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(wu * wv);
    }
  }
  return rule;
}

namespace {

double gauss_apply(const GaussRule1D& r, const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0;
  for (size_t i = 0; i < r.points.size(); ++i) acc += r.weights[i] * f(mid + half * r.points[i]);
  return acc * half;
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole,
                    const GaussRule1D& lo, const GaussRule1D& hi, double rel_tol, double abs_tol,
                    int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_apply(hi, f, a, mid);
  const double right = gauss_apply(hi, f, mid, b);
  const double refined = left + right;
  if (depth <= 0) return refined;
  const double noise = 1e-15 * (std::fabs(left) + std::fabs(right)) + 1e-300;
  if (std::fabs(refined - whole) <= std::max({abs_tol, rel_tol * std::fabs(refined), noise}))
    return refined;
  if (b - a <= 1e-14 * (std::fabs(a) + std::fabs(b) + 1.0)) return refined;
  return adaptive_rec(f, a, mid, left, lo, hi, rel_tol, abs_tol * 0.5, depth - 1) +
         adaptive_rec(f, mid, b, right, lo, hi, rel_tol, abs_tol * 0.5, depth - 1);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol, int max_depth) {
  const GaussRule1D lo = gauss_legendre(7), hi = gauss_legendre(15);
  const double whole = gauss_apply(hi, f, a, b);
  return adaptive_rec(f, a, b, whole, lo, hi, rel_tol, abs_tol, max_depth);
}

double integrate_graded(const std::function<double(double)>& f, double a, double b, int levels,
                        int n_gauss) {
  // dyadic refinement toward both endpoints
  const GaussRule1D rule = gauss_legendre(n_gauss);
  const double mid = 0.5 * (a + b);
  double acc = 0;
  double lo = a, len = 0.5 * (b - a);
  for (int k = 0; k < levels; ++k) len *= 0.5;
  // left half: [a, a+len], [a+len, a+2len], ... doubling up to mid
  double x0 = lo, x1 = lo + len;
  acc += gauss_apply(rule, f, x0, x1);
  while (x1 < mid - 1e-300) {
    x0 = x1;
    x1 = std::min(mid, lo + (x1 - lo) * 2.0);
    acc += gauss_apply(rule, f, x0, x1);
  }
  // right half mirrored
  len = 0.5 * (b - a);
  for (int k = 0; k < levels; ++k) len *= 0.5;
  x0 = b - len;
  acc += gauss_apply(rule, f, x0, b);
  double hi_edge = x0;
  while (hi_edge > mid + 1e-300) {
    x1 = hi_edge;
    x0 = std::max(mid, b - (b - hi_edge) * 2.0);
    acc += gauss_apply(rule, f, x0, x1);
    hi_edge = x0;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Appendix integrals and boundary flux moments
// ---------------------------------------------------------------------------

AppendixIntegrals appendix_integrals(double eta, double s) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("appendix_integrals: eta must lie in [0,1]");
  if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("appendix_integrals: s must lie in (0,1)");
  const double m = 1.0 / (1.0 - s);
  AppendixIntegrals out{};
  // I1, I2 from the z-substituted (bounded) integrands
  out.i1 = m * integrate_graded(
                   [&](double z) {
                     const double zm = std::pow(z, m);
                     return std::pow(1.0 - eta * zm, s) * (1.0 - zm);
                   },
                   0.0, 1.0);
  out.i2 = m * integrate_graded(
                   [&](double z) {
                     const double zm = std::pow(z, m);
                     return std::pow(1.0 - zm, s) * (1.0 - eta * zm);
                   },
                   0.0, 1.0);
  // I3, I4 directly from the defining integrals (bounded integrands)
  out.i3 = integrate_graded(
      [&](double xi) { return std::pow(1.0 - xi * eta, s) * std::pow(xi, 1.0 - s); }, 0.0, 1.0);
  out.i4 = eta * integrate_graded(
                     [&](double xi) { return std::pow(1.0 - xi, s) * std::pow(xi, 1.0 - s); }, 0.0,
                     1.0);
  return out;
}

FluxMoments boundary_flux_moments_1d(double h, double s) {
  if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("boundary_flux_moments_1d: need 0 < h <= 1");
  if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("boundary_flux_moments_1d: s in (0,1)");

  // Outer eta-integrals of eta^s I_k(eta) / (h+2eta)^{1+2s}  and  I_k(eta) / (h eta+2)^{1+2s}.
  double p_hat = 0, p_far = 0;

  // smooth parts: I2 and I4 kernels, no boundary layer
  {
    const GaussRule1D g = gauss_legendre(20);
    for (size_t i = 0; i < g.points.size(); ++i) {
      const double eta = 0.5 * (1.0 + g.points[i]);
      const double w = 0.5 * g.weights[i];
      const AppendixIntegrals I = appendix_integrals(eta, s);
      const double ker = std::pow(h * eta + 2.0, -1.0 - 2.0 * s);
      p_hat += w * I.i2 * ker;
      p_far += w * I.i4 * ker;
    }
  }

  // peaked parts: weight eta^s against a kernel concentrated at eta ~ h
  {
    const GaussRule1D gj = gauss_jacobi_01(16, s);
    for (size_t i = 0; i < gj.points.size(); ++i) {
      const double eta = h * gj.points[i];
      const double w = std::pow(h, s + 1.0) * gj.weights[i];
      const AppendixIntegrals I = appendix_integrals(eta, s);
      const double ker = std::pow(h + 2.0 * eta, -1.0 - 2.0 * s);
      p_hat += w * I.i1 * ker;
      p_far += w * I.i3 * ker;
    }
    const GaussRule1D g = gauss_legendre(16);
    double lo = h;
    while (lo < 1.0) {
      const double hi = std::min(1.0, 2.0 * lo);
      for (size_t i = 0; i < g.points.size(); ++i) {
        const double eta = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.points[i];
        const double w = 0.5 * (hi - lo) * g.weights[i];
        const AppendixIntegrals I = appendix_integrals(eta, s);
        const double ker = std::pow(eta, s) * std::pow(h + 2.0 * eta, -1.0 - 2.0 * s);
        p_hat += w * I.i1 * ker;
        p_far += w * I.i3 * ker;
      }
      lo = hi;
    }
  }

  const double pref = -normalization_constant(1, s) * dirichlet_constant(s) *
                      std::pow(2.0, 2.0 * s + 1.0) * h;
  return {pref * p_hat, pref * p_far};
}

// ---------------------------------------------------------------------------
// 1D pair integrals
// ---------------------------------------------------------------------------

namespace {

double trace_slope(Trace1D t, double len) {
  switch (t) {
    case Trace1D::hat_left: return -1.0 / len;
    case Trace1D::hat_right: return 1.0 / len;
    default: return 0.0;
  }
}

double trace_value(Trace1D t, double x, double e0, double e1) {
  switch (t) {
    case Trace1D::hat_left: return (e1 - x) / (e1 - e0);
    case Trace1D::hat_right: return (x - e0) / (e1 - e0);
    case Trace1D::one: return 1.0;
    default: return 0.0;
  }
}

double trace_value_at_node(Trace1D t, bool at_left) {
  switch (t) {
    case Trace1D::hat_left: return at_left ? 1.0 : 0.0;
    case Trace1D::hat_right: return at_left ? 0.0 : 1.0;
    case Trace1D::one: return 1.0;
    default: return 0.0;
  }
}

double adjacent_pair_1d(double la, double lb, double Ai, double Bi, double Aj, double Bj,
                        double s, int n) {
  // x-element [v, v+la], y-element [v-lb, v]; radial direction integrated exactly
  const GaussRule1D g = gauss_legendre(n);
  double g1 = 0, g2 = 0;
  for (size_t k = 0; k < g.points.size(); ++k) {
    const double t = 0.5 * (1.0 + g.points[k]);
    const double w = 0.5 * g.weights[k];
    g1 += w * (Ai + Bi * t) * (Aj + Bj * t) * std::pow(la + lb * t, -1.0 - 2.0 * s);
    g2 += w * (Ai * t + Bi) * (Aj * t + Bj) * std::pow(la * t + lb, -1.0 - 2.0 * s);
  }
  return la * lb / (3.0 - 2.0 * s) * (g1 + g2);
}

} // namespace

double pair_integral_1d(double a0, double a1, double b0, double b1, double s, PairTrace1D fi,
                        PairTrace1D fj, int order) {
  if (!(a1 > a0) || !(b1 > b0)) throw std::invalid_argument("pair_integral_1d: empty element");
  const double la = a1 - a0, lb = b1 - b0;
  const double tol = 1e-12 * std::max(la, lb);

  const bool identical = std::fabs(a0 - b0) < tol && std::fabs(a1 - b1) < tol;
  if (identical) {
    if (fi.on_a != fi.on_b || fj.on_a != fj.on_b)
      throw std::runtime_error("pair_integral_1d: discontinuous trace on identical elements");
    const double si = trace_slope(fi.on_a, la), sj = trace_slope(fj.on_a, la);
    if (si == 0.0 || sj == 0.0) return 0.0;
    return si * sj * 2.0 * std::pow(la, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
  }

  const bool a_right_of_b = std::fabs(a0 - b1) < tol;
  const bool b_right_of_a = std::fabs(b0 - a1) < tol;
  if (a_right_of_b || b_right_of_a) {
    // shared-vertex case: normalize so the x-element sits right of the vertex
    double xl, yl;       // lengths of x-side and y-side elements
    Trace1D fix, fiy, fjx, fjy;
    if (a_right_of_b) {
      xl = la; yl = lb;
      fix = fi.on_a; fiy = fi.on_b; fjx = fj.on_a; fjy = fj.on_b;
    } else {
      xl = lb; yl = la;
      fix = fi.on_b; fiy = fi.on_a; fjx = fj.on_b; fjy = fj.on_a;
    }
    // continuity across the shared vertex (x-side left node, y-side right node)
    if (std::fabs(trace_value_at_node(fix, true) - trace_value_at_node(fiy, false)) > 1e-12 ||
        std::fabs(trace_value_at_node(fjx, true) - trace_value_at_node(fjy, false)) > 1e-12)
      throw std::runtime_error("pair_integral_1d: discontinuous trace at shared vertex");
    const double Ai = trace_slope(fix, xl) * xl, Bi = trace_slope(fiy, yl) * yl;
    const double Aj = trace_slope(fjx, xl) * xl, Bj = trace_slope(fjy, yl) * yl;
    if ((Ai == 0.0 && Bi == 0.0) || (Aj == 0.0 && Bj == 0.0)) return 0.0;
    int n = order > 0 ? order : 16;
    double v = adjacent_pair_1d(xl, yl, Ai, Bi, Aj, Bj, s, n);
    const double v2 = adjacent_pair_1d(xl, yl, Ai, Bi, Aj, Bj, s, n + 4);
    if (std::fabs(v2 - v) > 1e-11 * std::max(std::fabs(v2), 1e-300))
      v = adjacent_pair_1d(xl, yl, Ai, Bi, Aj, Bj, s, n + 12);
    else
      v = v2;
    return v;
  }

  const bool disjoint = (b0 > a1 + tol) || (a0 > b1 + tol);
  if (!disjoint) throw std::runtime_error("pair_integral_1d: elements overlap but are not identical");

  if (fi.on_a == Trace1D::one && fi.on_b == Trace1D::one) return 0.0;
  if (fj.on_a == Trace1D::one && fj.on_b == Trace1D::one) return 0.0;
  if (fi.on_a == Trace1D::zero && fi.on_b == Trace1D::zero) return 0.0;
  if (fj.on_a == Trace1D::zero && fj.on_b == Trace1D::zero) return 0.0;

  const double gap = (b0 > a1) ? b0 - a1 : a0 - b1;
  const double ratio = std::max(la, lb) / gap;
  int n = order > 0 ? order
                    : std::clamp(12 + 4 * static_cast<int>(std::ceil(std::log2(std::max(ratio, 1.0)))),
                                 12, 48);
  const GaussRule1D g = gauss_legendre(n);
  double acc = 0;
  for (size_t k = 0; k < g.points.size(); ++k) {
    const double x = 0.5 * (a0 + a1) + 0.5 * la * g.points[k];
    const double fxi = trace_value(fi.on_a, x, a0, a1);
    const double fxj = trace_value(fj.on_a, x, a0, a1);
    double inner = 0;
    for (size_t l = 0; l < g.points.size(); ++l) {
      const double y = 0.5 * (b0 + b1) + 0.5 * lb * g.points[l];
      const double di = fxi - trace_value(fi.on_b, y, b0, b1);
      const double dj = fxj - trace_value(fj.on_b, y, b0, b1);
      inner += g.weights[l] * di * dj * std::pow(std::fabs(x - y), -1.0 - 2.0 * s);
    }
    acc += g.weights[k] * inner;
  }
  return acc * 0.25 * la * lb;
}

// ---------------------------------------------------------------------------
// 2D pair integrals
// ---------------------------------------------------------------------------

namespace {

using Vec2 = std::array<double, 2>;

inline Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

// identical pair: covariogram reduction with exact radial integral
void identical_block(const TriMesh2D& mesh, int t, double s, PairBlock2D& blk) {
  const auto& tri = mesh.triangles[t];
  const Vec2 p0 = mesh.points[tri[0]], p1 = mesh.points[tri[1]], p2 = mesh.points[tri[2]];
  const double area = mesh.tri_area(t);
  // hat gradients
  Vec2 g[3];
  const Vec2 edges[3] = {sub(p2, p1), sub(p0, p2), sub(p1, p0)}; // opposite vertex i
  for (int i = 0; i < 3; ++i) g[i] = {-edges[i][1] / (2.0 * area), edges[i][0] / (2.0 * area)};

  // difference-body hexagon vertices, sorted by angle
  const Vec2 d1 = sub(p1, p0), d2 = sub(p2, p0), d3 = sub(p2, p1);
  std::array<Vec2, 6> hex = {d1, d2, d3, {-d1[0], -d1[1]}, {-d2[0], -d2[1]}, {-d3[0], -d3[1]}};
  std::sort(hex.begin(), hex.end(),
            [](const Vec2& u, const Vec2& v) { return std::atan2(u[1], u[0]) < std::atan2(v[1], v[0]); });

  const double beta = 1.0 / (2.0 - 2.0 * s) - 2.0 / (3.0 - 2.0 * s) + 1.0 / (4.0 - 2.0 * s);
  const GaussRule1D gr = gauss_legendre(24);
  double acc[3][3] = {};
  for (int edge = 0; edge < 6; ++edge) {
    const Vec2 u = hex[edge], w = hex[(edge + 1) % 6];
    double th0 = std::atan2(u[1], u[0]);
    double th1 = std::atan2(w[1], w[0]);
    if (th1 <= th0) th1 += 2.0 * std::numbers::pi;
    // supporting line of this hexagon edge: x . nvec = c
    const Vec2 ev = sub(w, u);
    Vec2 nvec = {-ev[1], ev[0]};
    double c = dot(nvec, u);
    if (c < 0) { nvec = {-nvec[0], -nvec[1]}; c = -c; }
    for (size_t k = 0; k < gr.points.size(); ++k) {
      const double th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * gr.points[k];
      const double wq = 0.5 * (th1 - th0) * gr.weights[k];
      const Vec2 om = {std::cos(th), std::sin(th)};
      const double rho = c / dot(nvec, om);
      const double rpow = std::pow(rho, 2.0 - 2.0 * s);
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) acc[i][j] += wq * dot(g[i], om) * dot(g[j], om) * rpow;
    }
  }
  blk.n_nodes = 3;
  for (int i = 0; i < 3; ++i) blk.nodes[i] = tri[i];
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double v = area * beta * acc[i][j];
      blk.entry[i][j] = v;
      blk.entry[j][i] = v;
    }
}

struct EdgePiece {
  // sigma(c_or_a, b_or_t) and the affine max-branch m on this piece
  int face;        // 0:A  1:B  2:C  3:D
  double lo0, hi0; // range of first parameter
  int mcase;
};

// edge-shared pair: 3 small quantities (z1, u2, w2), exact radial integral,
// eight smooth pieces over the faces of the max-coordinate cube
void edge_block(const TriMesh2D& mesh, int ta, int tb, const std::array<int, 2>& shared,
                int apex_a, int apex_b, double s, PairBlock2D& blk, int order) {
  const Vec2 v0 = mesh.points[shared[0]], v1 = mesh.points[shared[1]];
  const Vec2 A = mesh.points[apex_a], B = mesh.points[apex_b];
  const Vec2 e = sub(v1, v0), gA = sub(A, v1), gB = sub(B, v1);
  const double area_a = std::fabs(mesh.tri_area(ta)), area_b = std::fabs(mesh.tri_area(tb));

  blk.n_nodes = 4;
  blk.nodes = {shared[0], shared[1], apex_a, apex_b, 0, 0};
  // D_p(sigma) = P_p z1 + Q_p u2 + R_p w2 for the hat of each involved node
  double P[4], Q[4], R[4];
  for (int p = 0; p < 4; ++p) {
    const int node = blk.nodes[p];
    const double at_v0 = node == shared[0] ? 1.0 : 0.0;
    const double at_v1 = node == shared[1] ? 1.0 : 0.0;
    const double at_A = node == apex_a ? 1.0 : 0.0;
    const double at_B = node == apex_b ? 1.0 : 0.0;
    P[p] = at_v1 - at_v0;
    Q[p] = at_A - at_v1;
    R[p] = -(at_B - at_v1);
  }

  const int n = order > 0 ? order : 16;
  const GaussRule1D gr = gauss_legendre(n);
  const double expo = s * 2.0 - 3.0;
  double acc[4][4] = {};

  auto accumulate = [&](double s1, double s2, double s3, double m, double w) {
    const Vec2 L = {s1 * e[0] + s2 * gA[0] - s3 * gB[0], s1 * e[1] + s2 * gA[1] - s3 * gB[1]};
    const double ker = std::pow(norm(L), -2.0 - 2.0 * s) * std::pow(m, expo) * w;
    double D[4];
    for (int p = 0; p < 4; ++p) D[p] = P[p] * s1 + Q[p] * s2 + R[p] * s3;
    for (int p = 0; p < 4; ++p)
      for (int q = p; q < 4; ++q) acc[p][q] += ker * D[p] * D[q];
  };

  for (size_t i = 0; i < gr.points.size(); ++i) {
    const double x = 0.5 * (1.0 + gr.points[i]); // in [0,1]
    const double wx = 0.5 * gr.weights[i];
    for (size_t j = 0; j < gr.points.size(); ++j) {
      const double y = 0.5 * (1.0 + gr.points[j]);
      const double wy = 0.5 * gr.weights[j];
      const double w = wx * wy;
      // face A: sigma = (1, x, y), m = 1 + y
      accumulate(1.0, x, y, 1.0 + y, w);
      // face B: sigma = (-1, x, y), m = 1 + x
      accumulate(-1.0, x, y, 1.0 + x, w);
      // face C, c in [-1,0]: sigma = (-x, 1, y), m = 1 + x
      accumulate(-x, 1.0, y, 1.0 + x, w);
      // face C, c in [0,1], b <= 1-c: sigma = (x, 1, (1-x) y), m = 1
      accumulate(x, 1.0, (1.0 - x) * y, 1.0, w * (1.0 - x));
      // face C, c in [0,1], b >= 1-c: sigma = (x, 1, 1-x + x y), m = b + c
      {
        const double b = 1.0 - x + x * y;
        accumulate(x, 1.0, b, b + x, w * x);
      }
      // face D, c in [0,1]: sigma = (x, y, 1), m = 1 + c
      accumulate(x, y, 1.0, 1.0 + x, w);
      // face D, c in [-1,0], a <= 1+c: sigma = (-x, (1-x) y, 1), m = 1
      accumulate(-x, (1.0 - x) * y, 1.0, 1.0, w * (1.0 - x));
      // face D, c in [-1,0], a >= 1+c: sigma = (-x, 1-x + x y, 1), m = a - c
      {
        const double a = 1.0 - x + x * y;
        accumulate(-x, a, 1.0, a + x, w * x);
      }
    }
  }

  const double pref = 4.0 * area_a * area_b / ((3.0 - 2.0 * s) * (4.0 - 2.0 * s));
  for (int p = 0; p < 4; ++p)
    for (int q = p; q < 4; ++q) {
      blk.entry[p][q] = pref * acc[p][q];
      blk.entry[q][p] = blk.entry[p][q];
    }
}

// vertex-shared pair: both triangles are cones over the shared vertex; the
// joint radial direction is integrated exactly
void vertex_block(const TriMesh2D& mesh, int ta, int tb, int shared, double s, PairBlock2D& blk,
                  int order) {
  const auto& A = mesh.triangles[ta];
  const auto& Bt = mesh.triangles[tb];
  int pa[2], pb[2], na = 0, nb = 0;
  for (int k = 0; k < 3; ++k) {
    if (A[k] != shared) pa[na++] = A[k];
    if (Bt[k] != shared) pb[nb++] = Bt[k];
  }
  blk.n_nodes = 5;
  blk.nodes = {shared, pa[0], pa[1], pb[0], pb[1], 0};

  const Vec2 V = mesh.points[shared];
  const Vec2 ea0 = sub(mesh.points[pa[0]], V), ea1 = sub(mesh.points[pa[1]], V);
  const Vec2 eb0 = sub(mesh.points[pb[0]], V), eb1 = sub(mesh.points[pb[1]], V);
  const double area_a = std::fabs(mesh.tri_area(ta)), area_b = std::fabs(mesh.tri_area(tb));

  // phi_p(V + E(t)) - phi_p(V), linear in t along the far edge (f0 -> f1)
  auto far_minus_center = [shared](int p, int f0, int f1, double t) {
    if (p == f0) return 1.0 - t;
    if (p == f1) return t;
    if (p == shared) return -1.0;
    return 0.0;
  };

  const int n = order > 0 ? order : 12;
  const GaussRule1D gr = gauss_legendre(n);
  double acc[5][5] = {};
  for (size_t i = 0; i < gr.points.size(); ++i) {
    const double tA = 0.5 * (1.0 + gr.points[i]);
    const double wA = 0.5 * gr.weights[i];
    const Vec2 Ea = {(1.0 - tA) * ea0[0] + tA * ea1[0], (1.0 - tA) * ea0[1] + tA * ea1[1]};
    double av[5];
    for (int p = 0; p < 5; ++p) av[p] = far_minus_center(blk.nodes[p], pa[0], pa[1], tA);
    for (size_t j = 0; j < gr.points.size(); ++j) {
      const double tB = 0.5 * (1.0 + gr.points[j]);
      const double wB = 0.5 * gr.weights[j];
      const Vec2 Eb = {(1.0 - tB) * eb0[0] + tB * eb1[0], (1.0 - tB) * eb0[1] + tB * eb1[1]};
      double bv[5];
      for (int p = 0; p < 5; ++p) bv[p] = far_minus_center(blk.nodes[p], pb[0], pb[1], tB);
      for (size_t k = 0; k < gr.points.size(); ++k) {
        const double tau = 0.5 * (1.0 + gr.points[k]);
        const double w = wA * wB * 0.5 * gr.weights[k] * tau;
        const Vec2 r1 = {Ea[0] - tau * Eb[0], Ea[1] - tau * Eb[1]};
        const Vec2 r2 = {tau * Ea[0] - Eb[0], tau * Ea[1] - Eb[1]};
        const double k1 = std::pow(norm(r1), -2.0 - 2.0 * s);
        const double k2 = std::pow(norm(r2), -2.0 - 2.0 * s);
        for (int p = 0; p < 5; ++p)
          for (int q = p; q < 5; ++q)
            acc[p][q] += w * ((av[p] - tau * bv[p]) * (av[q] - tau * bv[q]) * k1 +
                              (tau * av[p] - bv[p]) * (tau * av[q] - bv[q]) * k2);
      }
    }
  }
  const double pref = 4.0 * area_a * area_b / (4.0 - 2.0 * s);
  for (int p = 0; p < 5; ++p)
    for (int q = p; q < 5; ++q) {
      blk.entry[p][q] = pref * acc[p][q];
      blk.entry[q][p] = blk.entry[p][q];
    }
}

void disjoint_block(const TriMesh2D& mesh, int ta, int tb, double s, PairBlock2D& blk, int order) {
  const auto& A = mesh.triangles[ta];
  const auto& Bt = mesh.triangles[tb];
  blk.n_nodes = 6;
  for (int k = 0; k < 3; ++k) {
    blk.nodes[k] = A[k];
    blk.nodes[3 + k] = Bt[k];
  }
  const Vec2 a0 = mesh.points[A[0]], a1 = mesh.points[A[1]], a2 = mesh.points[A[2]];
  const Vec2 b0 = mesh.points[Bt[0]], b1 = mesh.points[Bt[1]], b2 = mesh.points[Bt[2]];
  double gap = 1e300;
  for (const Vec2& p : {a0, a1, a2})
    for (const Vec2& q : {b0, b1, b2}) gap = std::min(gap, norm(sub(p, q)));
  const double diam = std::max(mesh.tri_diameter(ta), mesh.tri_diameter(tb));
  gap = std::max(gap, 1e-14 * diam);
  int n = order > 0 ? order
                    : std::clamp(5 + 2 * static_cast<int>(std::ceil(std::log2(std::max(diam / gap, 1.0)))),
                                 5, 16);
  const TriangleRule rule = triangle_rule(n);
  const double ja = 2.0 * std::fabs(mesh.tri_area(ta)), jb = 2.0 * std::fabs(mesh.tri_area(tb));
  double acc[6][6] = {};
  for (size_t i = 0; i < rule.points.size(); ++i) {
    const double xi = rule.points[i][0], et = rule.points[i][1];
    const double la[3] = {1.0 - xi - et, xi, et};
    const Vec2 x = {a0[0] + xi * (a1[0] - a0[0]) + et * (a2[0] - a0[0]),
                    a0[1] + xi * (a1[1] - a0[1]) + et * (a2[1] - a0[1])};
    const double wi = rule.weights[i] * ja;
    for (size_t j = 0; j < rule.points.size(); ++j) {
      const double xj = rule.points[j][0], ej = rule.points[j][1];
      const double lb[3] = {1.0 - xj - ej, xj, ej};
      const Vec2 y = {b0[0] + xj * (b1[0] - b0[0]) + ej * (b2[0] - b0[0]),
                      b0[1] + xj * (b1[1] - b0[1]) + ej * (b2[1] - b0[1])};
      const double ker = wi * rule.weights[j] * jb * std::pow(norm(sub(x, y)), -2.0 - 2.0 * s);
      const double D[6] = {la[0], la[1], la[2], -lb[0], -lb[1], -lb[2]};
      for (int p = 0; p < 6; ++p)
        for (int q = p; q < 6; ++q) acc[p][q] += ker * D[p] * D[q];
    }
  }
  for (int p = 0; p < 6; ++p)
    for (int q = p; q < 6; ++q) {
      blk.entry[p][q] = acc[p][q];
      blk.entry[q][p] = acc[p][q];
    }
}

} // namespace

PairBlock2D pair_integral_2d(const TriMesh2D& mesh, int ta, int tb, double s, int order) {
  PairBlock2D blk{};
  const auto& A = mesh.triangles[ta];
  const auto& B = mesh.triangles[tb];
  std::array<int, 2> shared{};
  int n_shared = 0;
  int apex_a = -1, apex_b = -1;
  for (int k = 0; k < 3; ++k) {
    bool found = false;
    for (int l = 0; l < 3; ++l)
      if (A[k] == B[l]) found = true;
    if (found) {
      if (n_shared < 2) shared[n_shared] = A[k];
      ++n_shared;
    } else {
      apex_a = A[k];
    }
  }
  for (int l = 0; l < 3; ++l) {
    bool found = false;
    for (int k = 0; k < 3; ++k)
      if (A[k] == B[l]) found = true;
    if (!found) apex_b = B[l];
  }
  blk.contact = n_shared;
  if (mesh.tri_area(ta) <= 0 || mesh.tri_area(tb) <= 0)
    throw std::runtime_error("pair_integral_2d: degenerate triangle");
  if (n_shared == 3) identical_block(mesh, ta, s, blk);
  else if (n_shared == 2) edge_block(mesh, ta, tb, shared, apex_a, apex_b, s, blk, order);
  else if (n_shared == 1) vertex_block(mesh, ta, tb, shared[0], s, blk, order);
  else disjoint_block(mesh, ta, tb, s, blk, order);
  return blk;
}

// ---------------------------------------------------------------------------
// tail integrals
// ---------------------------------------------------------------------------

double tail_weight_1d(double x, double s, double lo, double hi) {
  if (!(x > lo) || !(x < hi)) throw std::invalid_argument("tail_weight_1d: x must lie inside Lambda");
  return (std::pow(hi - x, -2.0 * s) + std::pow(x - lo, -2.0 * s)) / (2.0 * s);
}

namespace {

double angular_kernel(double rho, double s) {
  // int_0^{2pi} (1 + rho^2 - 2 rho cos phi)^{-1-s} dphi, rho < 1
  const int n = std::min(4096, std::max(48, static_cast<int>(16.0 / (1.0 - rho))));
  double acc = 0;
  for (int j = 0; j < n; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / n;
    acc += std::pow(1.0 + rho * rho - 2.0 * rho * std::cos(phi), -1.0 - s);
  }
  return acc * 2.0 * std::numbers::pi / n;
}

} // namespace

double tail_weight_2d(double r, double s, double R) {
  if (!(r < R)) throw std::invalid_argument("tail_weight_2d: point must lie inside Lambda");
  const GaussRule1D gj = gauss_jacobi_01(16, 2.0 * s - 1.0);
  double acc = 0;
  for (size_t k = 0; k < gj.points.size(); ++k)
    acc += gj.weights[k] * angular_kernel(r * gj.points[k] / R, s);
  return std::pow(R, -2.0 * s) * acc;
}

std::array<double, 3> tail_kernel_moments_1d(double e0, double e1, double s, double lo, double hi) {
  if (e0 < lo - 1e-12 || e1 > hi + 1e-12)
    throw std::invalid_argument("tail_kernel_moments_1d: element must lie inside Lambda");
  const GaussRule1D g = gauss_legendre(12);
  std::array<double, 3> m{};
  const double len = e1 - e0;
  for (size_t k = 0; k < g.points.size(); ++k) {
    const double x = 0.5 * (e0 + e1) + 0.5 * len * g.points[k];
    const double w = 0.5 * len * g.weights[k] * tail_weight_1d(x, s, lo, hi);
    m[0] += w * (e1 - x) / len;
    m[1] += w * (x - e0) / len;
    m[2] += w;
  }
  return m;
}

std::array<double, 4> tail_kernel_moments_2d(const TriMesh2D& mesh, int t, double s, double R) {
  const auto& tri = mesh.triangles[t];
  const Vec2 p0 = mesh.points[tri[0]], p1 = mesh.points[tri[1]], p2 = mesh.points[tri[2]];
  for (const Vec2& p : {p0, p1, p2})
    if (norm(p) >= R) throw std::invalid_argument("tail_kernel_moments_2d: element outside Lambda");
  const TriangleRule rule = triangle_rule(6);
  const double jac = 2.0 * std::fabs(mesh.tri_area(t));
  std::array<double, 4> m{};
  for (size_t k = 0; k < rule.points.size(); ++k) {
    const double xi = rule.points[k][0], et = rule.points[k][1];
    const Vec2 x = {p0[0] + xi * (p1[0] - p0[0]) + et * (p2[0] - p0[0]),
                    p0[1] + xi * (p1[1] - p0[1]) + et * (p2[1] - p0[1])};
    const double w = rule.weights[k] * jac * tail_weight_2d(norm(x), s, R);
    m[0] += w * (1.0 - xi - et);
    m[1] += w * xi;
    m[2] += w * et;
    m[3] += w;
  }
  return m;
}

TailSpec TailSpec::power_law(double A, double p) {
  if (!(p > 0)) throw std::invalid_argument("TailSpec: power-law decay exponent must be positive");
  TailSpec t;
  t.kind = Kind::power_law;
  t.amplitude = A;
  t.decay_exponent = p;
  return t;
}

TailSpec TailSpec::generic(std::function<double(double)> radial, double tol) {
  TailSpec t;
  t.kind = Kind::generic;
  t.radial = std::move(radial);
  t.adaptive_tol = tol;
  return t;
}

double tail_flux_integral(const TailSpec& tail, double ext_radius, int d) {
  const double R = ext_radius;
  switch (tail.kind) {
    case TailSpec::Kind::zero: return 0.0;
    case TailSpec::Kind::power_law: {
      // g = -A |x|^{-d-p}
      const double A = tail.amplitude, p = tail.decay_exponent;
      if (d == 1) return -2.0 * A * std::pow(R, -p) / p;
      return -2.0 * std::numbers::pi * A * std::pow(R, -p) / p;
    }
    case TailSpec::Kind::generic: {
      if (!tail.radial) throw std::invalid_argument("tail_flux_integral: missing tail callable");
      // substitute r = R/t; decay of the integrand toward t = 0 is handled by grading
      if (d == 1) {
        auto f = [&](double t) { return tail.radial(R / t) / (t * t); };
        return 2.0 * R * integrate_graded(f, 0.0, 1.0, 40, 12);
      }
      auto f = [&](double t) { return tail.radial(R / t) / (t * t * t); };
      return 2.0 * std::numbers::pi * R * R * integrate_graded(f, 0.0, 1.0, 40, 12);
    }
  }
  return 0.0;
}

} // namespace fracfem
