#include "fracfem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fracfem/special_functions.hpp"

namespace fracfem {

RateFit fit_rate(const std::vector<double>& scales, const std::vector<double>& errors) {
  if (scales.size() != errors.size() || scales.size() < 2)
    throw std::invalid_argument("fit_rate: need >= 2 (scale, error) points");
  RateFit fit;
  fit.scales = scales;
  fit.errors = errors;
  const int n = static_cast<int>(scales.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!(scales[i] > 0) || !(errors[i] > 0))
      throw std::invalid_argument("fit_rate: scales and errors must be positive");
    lx[i] = std::log(scales[i]);
    ly[i] = std::log(errors[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::fabs(det) < 1e-300) throw std::invalid_argument("fit_rate: scales must be distinct");
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy * sxx - sx * sxy) / det;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (int i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * lx[i];
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - ybar) * (ly[i] - ybar);
  }
  fit.residual = std::sqrt(ss_res / n);
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double l2_error_omega(const DiscreteSolution& u, const std::function<double(double)>& exact,
                      int quad_order) {
  if (!u.mesh1d) throw std::logic_error("l2_error_omega: 1D overload needs a 1D solution");
  const Mesh1D& m = *u.mesh1d;
  const GaussRule1D g = gauss_legendre(std::max(8, quad_order));
  double acc = 0;
  for (int e = m.first_omega_elem; e < m.end_omega_elem; ++e) {
    const double e0 = m.elem_lo(e), e1 = m.elem_hi(e), len = e1 - e0;
    const double c0 = u.coeff[e], c1 = u.coeff[e + 1];
    for (size_t k = 0; k < g.points.size(); ++k) {
      const double t = 0.5 * (1.0 + g.points[k]);
      const double x = e0 + t * len;
      const double d = (1.0 - t) * c0 + t * c1 - exact(x);
      acc += 0.5 * len * g.weights[k] * d * d;
    }
  }
  return std::sqrt(acc);
}

double l2_error_omega(const DiscreteSolution& u,
                      const std::function<double(double, double)>& exact, int quad_order) {
  if (!u.mesh2d) throw std::logic_error("l2_error_omega: 2D overload needs a 2D solution");
  const TriMesh2D& m = *u.mesh2d;
  const TriangleRule rule = triangle_rule(std::max(5, (quad_order + 1) / 2));
  double acc = 0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    if (!m.tri_in_omega(t)) continue;
    const auto& tri = m.triangles[t];
    const auto& p0 = m.points[tri[0]];
    const auto& p1 = m.points[tri[1]];
    const auto& p2 = m.points[tri[2]];
    const double jac = 2.0 * m.tri_area(t);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const double xi = rule.points[k][0], et = rule.points[k][1];
      const double x = p0[0] + xi * (p1[0] - p0[0]) + et * (p2[0] - p0[0]);
      const double y = p0[1] + xi * (p1[1] - p0[1]) + et * (p2[1] - p0[1]);
      const double uh = (1.0 - xi - et) * u.coeff[tri[0]] + xi * u.coeff[tri[1]] + et * u.coeff[tri[2]];
      const double d = uh - exact(x, y);
      acc += rule.weights[k] * jac * d * d;
    }
  }
  return std::sqrt(acc);
}

namespace {

// error sampled on one element: e(x) = exact(x) - u_h(x) with u_h local
struct ElemError1D {
  double e0, e1, c0, c1;
  const std::function<double(double)>* exact;
  double operator()(double x) const {
    const double t = (x - e0) / (e1 - e0);
    return (*exact)(x) - ((1.0 - t) * c0 + t * c1);
  }
};

// int int over T x T of (e(x)-e(y))^2 |x-y|^{-1-2s}, graded toward the diagonal
double hs_identical(const ElemError1D& f, double s) {
  const double len = f.e1 - f.e0;
  const GaussRule1D g = gauss_legendre(8);
  double acc = 0;
  double z1 = len, z0 = len * 0.5;
  for (int level = 0; level < 44; ++level) {
    double piece = 0;
    for (size_t k = 0; k < g.points.size(); ++k) {
      const double z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * g.points[k];
      double inner = 0;
      for (size_t l = 0; l < g.points.size(); ++l) {
        const double x = f.e0 + z + 0.5 * (1.0 + g.points[l]) * (len - z);
        const double d = f(x) - f(x - z);
        inner += 0.5 * (len - z) * g.weights[l] * d * d;
      }
      piece += 0.5 * (z1 - z0) * g.weights[k] * std::pow(z, -1.0 - 2.0 * s) * inner;
    }
    acc += piece;
    z1 = z0;
    z0 *= 0.5;
  }
  return 2.0 * acc;
}

// adjacent elements sharing node v, x-side of length lx right of v, y-side ly left
double hs_adjacent(const ElemError1D& fx, const ElemError1D& fy, double v, double lx, double ly,
                   double s) {
  const GaussRule1D g = gauss_legendre(8);
  double acc = 0;
  auto region = [&](bool first) {
    double total = 0;
    double x1 = 1.0, x0 = 0.5;
    for (int level = 0; level < 44; ++level) {
      double piece = 0;
      for (size_t k = 0; k < g.points.size(); ++k) {
        const double xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * g.points[k];
        double inner = 0;
        for (size_t l = 0; l < g.points.size(); ++l) {
          const double tau = 0.5 * (1.0 + g.points[l]);
          double xa, ya, ker;
          if (first) { // v <= y-offset tau*xi
            xa = v + lx * xi;
            ya = v - ly * xi * tau;
            ker = std::pow(xi, -2.0 * s) * std::pow(lx + ly * tau, -1.0 - 2.0 * s);
          } else {
            xa = v + lx * xi * tau;
            ya = v - ly * xi;
            ker = std::pow(xi, -2.0 * s) * std::pow(lx * tau + ly, -1.0 - 2.0 * s);
          }
          const double d = fx(xa) - fy(ya);
          inner += 0.5 * g.weights[l] * d * d * ker;
        }
        piece += 0.5 * (x1 - x0) * g.weights[k] * inner;
      }
      total += piece;
      x1 = x0;
      x0 *= 0.5;
    }
    return total;
  };
  return lx * ly * (region(true) + region(false));
}

} // namespace

HsError hs_error_omega_1d(const DiscreteSolution& u, const std::function<double(double)>& exact,
                          double s) {
  if (!u.mesh1d) throw std::invalid_argument("hs_error_omega_1d: 1D solutions only");
  const Mesh1D& m = *u.mesh1d;
  HsError out;
  out.l2 = l2_error_omega(u, exact, 10);

  const int b = m.first_omega_elem, e = m.end_omega_elem;
  const int n_om = e - b;
  const int nq = 6;
  const GaussRule1D g = gauss_legendre(nq);

  // cache error samples per omega element
  std::vector<double> samples(static_cast<size_t>(n_om) * nq);
  std::vector<double> xs(static_cast<size_t>(n_om) * nq);
  for (int a = 0; a < n_om; ++a) {
    const ElemError1D f{m.elem_lo(b + a), m.elem_hi(b + a), u.coeff[b + a], u.coeff[b + a + 1],
                        &exact};
    for (int k = 0; k < nq; ++k) {
      const double x = 0.5 * (f.e0 + f.e1) + 0.5 * (f.e1 - f.e0) * g.points[k];
      xs[a * nq + k] = x;
      samples[a * nq + k] = f(x);
    }
  }

  std::vector<double> partial(n_om, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (int a = 0; a < n_om; ++a) {
    const ElemError1D fa{m.elem_lo(b + a), m.elem_hi(b + a), u.coeff[b + a], u.coeff[b + a + 1],
                         &exact};
    double acc = hs_identical(fa, s);
    if (a + 1 < n_om) {
      const ElemError1D fb{m.elem_lo(b + a + 1), m.elem_hi(b + a + 1), u.coeff[b + a + 1],
                           u.coeff[b + a + 2], &exact};
      acc += 2.0 * hs_adjacent(fb, fa, m.elem_hi(b + a), fb.e1 - fb.e0, fa.e1 - fa.e0, s);
    }
    const double la = fa.e1 - fa.e0;
    for (int bb = a + 2; bb < n_om; ++bb) {
      const double lb = m.elem_len(b + bb);
      double sum = 0;
      for (int k = 0; k < nq; ++k) {
        const double x = xs[a * nq + k];
        const double ex = samples[a * nq + k];
        for (int l = 0; l < nq; ++l) {
          const double d = ex - samples[bb * nq + l];
          sum += g.weights[k] * g.weights[l] * d * d *
                 std::pow(xs[bb * nq + l] - x, -1.0 - 2.0 * s);
        }
      }
      acc += 2.0 * 0.25 * la * lb * sum;
    }
    partial[a] = acc;
  }
  double semi2 = 0;
  for (double v : partial) semi2 += v;
  out.seminorm = std::sqrt(semi2);
  out.full = std::sqrt(out.l2 * out.l2 + semi2);
  return out;
}

double omega_mean(const DiscreteSolution& u) {
  if (u.mesh1d) {
    const Mesh1D& m = *u.mesh1d;
    double integral = 0, measure = 0;
    for (int e = m.first_omega_elem; e < m.end_omega_elem; ++e) {
      const double len = m.elem_len(e);
      integral += len * 0.5 * (u.coeff[e] + u.coeff[e + 1]);
      measure += len;
    }
    return integral / measure;
  }
  const TriMesh2D& m = *u.mesh2d;
  double integral = 0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    if (!m.tri_in_omega(t)) continue;
    const auto& tri = m.triangles[t];
    integral += m.tri_area(t) * (u.coeff[tri[0]] + u.coeff[tri[1]] + u.coeff[tri[2]]) / 3.0;
  }
  return integral / m.omega_area;
}

TruncationResult truncation_study(const TruncationProblem& problem,
                                  const std::vector<double>& H_list, double h,
                                  const AssemblyOptions& opts) {
  if (H_list.size() < 3) throw std::invalid_argument("truncation_study: need >= 3 H values");
  for (size_t i = 1; i < H_list.size(); ++i)
    if (H_list[i] <= H_list[i - 1])
      throw std::invalid_argument("truncation_study: H values must increase");

  std::vector<Vector> omega_values;
  std::shared_ptr<const Mesh1D> omega_mesh;
  for (double H : H_list) {
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, H, h));
    LinearSystem sys = assemble_system(mesh, problem.f, problem.g, problem.params, opts);
    DiscreteSolution u = solve_stationary(sys);
    Vector vals(mesh->end_omega_elem - mesh->first_omega_elem + 1);
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = u.coeff[mesh->first_omega_elem + i];
    omega_values.push_back(std::move(vals));
    if (!omega_mesh) omega_mesh = mesh;
  }

  TruncationResult res;
  for (size_t n = 0; n + 1 < omega_values.size(); ++n) {
    const Vector& a = omega_values[n];
    const Vector& c = omega_values[n + 1];
    double acc = 0;
    for (size_t e = 0; e + 1 < a.size(); ++e) {
      const double len = omega_mesh->elem_len(omega_mesh->first_omega_elem + static_cast<int>(e));
      const double d0 = a[e] - c[e], d1 = a[e + 1] - c[e + 1];
      acc += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    res.differences.push_back(std::sqrt(acc));
    res.H_values.push_back(H_list[n + 1]);
  }
  res.fit = fit_rate(res.H_values, res.differences);
  res.exponent_c = -res.fit.slope;
  return res;
}

DecayDiagnostics decay_diagnostics(const DiscreteSolution& u, const FluxSpec& g) {
  DecayDiagnostics out;
  out.tail_value = u.tail_value();
  const double s = u.params.s;
  const double measure = u.mesh1d ? (u.mesh1d->omega_b - u.mesh1d->omega_a) : u.mesh2d->omega_area;

  double kappa = 0;
  bool divergent = false;
  switch (g.kind) {
    case FluxSpec::Kind::zero: kappa = 0; break;
    case FluxSpec::Kind::power_law:
    case FluxSpec::Kind::callable: {
      const TailSpec tail = (g.kind == FluxSpec::Kind::power_law)
                                ? TailSpec::power_law(g.amplitude, g.decay_exponent)
                                : g.tail;
      if (tail.kind == TailSpec::Kind::zero) kappa = 0;
      else if (tail.kind == TailSpec::Kind::power_law) {
        if (tail.decay_exponent == 2.0 * s) kappa = -tail.amplitude;
        else if (tail.decay_exponent > 2.0 * s) kappa = 0;
        else divergent = true;
      } else {
        throw std::invalid_argument("decay_diagnostics: tail must be power-law or zero");
      }
      break;
    }
    case FluxSpec::Kind::manufactured_1d:
      // g ~ -C_{1,s} c_s B(1/2, s+1) |x|^{-1-2s}: critical decay by construction
      kappa = -normalization_constant(1, s) * dirichlet_constant(s) * beta_fn(0.5, s + 1.0);
      break;
  }
  out.divergent = divergent;
  if (divergent) {
    out.predicted_limit = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.predicted_limit = kappa / (u.params.c_norm * measure) + omega_mean(u);
  return out;
}

// ---------------------------------------------------------------------------
// quasi-interpolation
// ---------------------------------------------------------------------------

InterpRegions build_interp_regions(const Mesh1D& mesh) {
  const int N = mesh.n_nodes();
  InterpRegions reg;
  reg.radius.resize(N);
  reg.measure.resize(N);
  reg.clipped.assign(N, false);
  for (int i = 0; i < N; ++i) {
    double clearance;
    if (i == 0) clearance = mesh.elem_len(0);
    else if (i == N - 1) clearance = mesh.elem_len(N - 2);
    else clearance = std::min(mesh.elem_len(i - 1), mesh.elem_len(i));
    const double rho = 0.99 * clearance;
    reg.radius[i] = rho;
    if (mesh.node_region[i] == NodeRegion::boundary) {
      reg.clipped[i] = true;
      reg.measure[i] = rho; // one-sided interval inside Omega
    } else if (i == 0 || i == N - 1) {
      reg.clipped[i] = true; // clip to Lambda at the mesh ends
      reg.measure[i] = rho;
    } else {
      reg.measure[i] = 2.0 * rho;
    }
  }
  return reg;
}

DiscreteSolution quasi_interpolate(const std::function<double(double)>& v,
                                   std::shared_ptr<const Mesh1D> mesh,
                                   const FractionalParams& params) {
  const Mesh1D& m = *mesh;
  const int N = m.n_nodes();
  const InterpRegions reg = build_interp_regions(m);
  const GaussRule1D g = gauss_legendre(16);
  DiscreteSolution out;
  out.coeff.assign(N + 1, 0.0);
  out.mesh1d = mesh;
  out.params = params;
  for (int i = 0; i < N; ++i) {
    const double x = m.nodes[i], rho = reg.radius[i];
    double lo = x - rho, hi = x + rho;
    if (m.node_region[i] == NodeRegion::boundary) {
      if (std::fabs(x - m.omega_a) < 1e-14) lo = x, hi = x + rho; // average inside Omega
      else lo = x - rho, hi = x;
    } else if (i == 0) {
      lo = x;
    } else if (i == N - 1) {
      hi = x;
    }
    double acc = 0;
    for (size_t k = 0; k < g.points.size(); ++k)
      acc += g.weights[k] * v(0.5 * (lo + hi) + 0.5 * (hi - lo) * g.points[k]);
    out.coeff[i] = 0.5 * acc; // divided by |R_i| = hi - lo
  }
  return out;
}

InterpRegions build_interp_regions(const TriMesh2D& mesh) {
  const int N = mesh.n_nodes();
  InterpRegions reg;
  reg.radius.assign(N, 1e300);
  reg.measure.assign(N, 0.0);
  reg.clipped.assign(N, false);
  // clearance: distance from the node to the opposite edge of each star triangle
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const auto& p = mesh.points[tri[k]];
      const auto& a = mesh.points[tri[(k + 1) % 3]];
      const auto& b = mesh.points[tri[(k + 2) % 3]];
      const double ex = b[0] - a[0], ey = b[1] - a[1];
      const double len2 = ex * ex + ey * ey;
      double tt = ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2;
      tt = std::clamp(tt, 0.0, 1.0);
      const double dx = p[0] - (a[0] + tt * ex), dy = p[1] - (a[1] + tt * ey);
      reg.radius[tri[k]] = std::min(reg.radius[tri[k]], std::hypot(dx, dy));
    }
  }
  for (int i = 0; i < N; ++i) {
    reg.radius[i] *= 0.99;
    reg.measure[i] = std::numbers::pi * reg.radius[i] * reg.radius[i];
  }
  return reg;
}

DiscreteSolution quasi_interpolate(const std::function<double(double, double)>& v,
                                   std::shared_ptr<const TriMesh2D> mesh,
                                   const FractionalParams& params) {
  const TriMesh2D& m = *mesh;
  const int N = m.n_nodes();
  InterpRegions reg = build_interp_regions(m);
  const double r_om = m.r_omega;

  // ring neighbors of boundary nodes (the two polygon edges along the omega circle)
  std::vector<std::array<int, 2>> ring_nb(N, {-1, -1});
  auto on_ring = [&](int i) {
    return std::fabs(std::hypot(m.points[i][0], m.points[i][1]) - r_om) < 1e-9 * r_om;
  };
  for (int t = 0; t < m.n_triangles(); ++t) {
    if (!m.tri_in_omega(t)) continue; // omega triangles see each boundary edge exactly once
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (on_ring(a) && on_ring(b)) {
        auto add = [&](int node, int nb) {
          if (ring_nb[node][0] == nb || ring_nb[node][1] == nb) return;
          if (ring_nb[node][0] < 0) ring_nb[node][0] = nb;
          else if (ring_nb[node][1] < 0) ring_nb[node][1] = nb;
        };
        add(a, b);
        add(b, a);
      }
    }
  }

  const GaussRule1D gr = gauss_legendre(10);
  const int n_theta = 24;
  DiscreteSolution out;
  out.coeff.assign(N + 1, 0.0);
  out.mesh2d = mesh;
  out.params = params;
  for (int i = 0; i < N; ++i) {
    const double cx = m.points[i][0], cy = m.points[i][1];
    const double rho = reg.radius[i];
    double th0 = 0, span = 2.0 * std::numbers::pi;
    if (on_ring(i) && ring_nb[i][0] >= 0 && ring_nb[i][1] >= 0) {
      // average over the sector between the two boundary edges, inside Omega
      const auto& q0 = m.points[ring_nb[i][0]];
      const auto& q1 = m.points[ring_nb[i][1]];
      double a0 = std::atan2(q0[1] - cy, q0[0] - cx);
      double a1 = std::atan2(q1[1] - cy, q1[0] - cx);
      const double ain = std::atan2(-cy, -cx); // toward the origin = inside
      double sp = a1 - a0;
      while (sp < 0) sp += 2.0 * std::numbers::pi;
      double rel = ain - a0;
      while (rel < 0) rel += 2.0 * std::numbers::pi;
      if (rel <= sp) { th0 = a0; span = sp; }
      else { th0 = a1; span = 2.0 * std::numbers::pi - sp; }
    }
    double acc = 0;
    for (int j = 0; j < n_theta; ++j) {
      const double th = th0 + span * (j + 0.5) / n_theta;
      const double ct = std::cos(th), st = std::sin(th);
      for (size_t k = 0; k < gr.points.size(); ++k) {
        const double r = 0.5 * rho * (1.0 + gr.points[k]);
        acc += 0.5 * rho * gr.weights[k] * (span / n_theta) * r * v(cx + r * ct, cy + r * st);
      }
    }
    out.coeff[i] = acc / (0.5 * rho * rho * span);
  }
  return out;
}

} // namespace fracfem
