#include "fracfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracfem {

// ---------------------------------------------------------------------------
// manufactured flux
// ---------------------------------------------------------------------------

double manufactured_flux_1d(double x, double s) {
  const double ax = std::fabs(x);
  if (!(ax > 1.0)) throw std::domain_error("manufactured_flux_1d: |x| must exceed 1");
  if (!(s > 0.0) || !(s < 1.0)) throw std::invalid_argument("manufactured_flux_1d: s in (0,1)");
  // int_{-1}^1 (1-y^2)^s (x-y)^{-1-2s} dy  =  2^{2s+1} int_0^1 z^s (1-z)^s ((x+1)-2z)^{-1-2s} dz
  const double expo = -1.0 - 2.0 * s;
  double integral = 0;
  { // z in [0, 1/2]: absorb the z^s weight, everything else analytic
    const GaussRule1D gj = gauss_jacobi_01(24, s);
    double acc = 0;
    for (size_t k = 0; k < gj.points.size(); ++k) {
      const double z = 0.5 * gj.points[k];
      acc += gj.weights[k] * std::pow(1.0 - z, s) * std::pow(ax + 1.0 - 2.0 * z, expo);
    }
    integral += std::pow(0.5, s + 1.0) * acc;
  }
  { // z in [1/2, 1]: w = 1-z, kernel peaked at the w ~ (x-1)/2 scale
    const double eps = 0.5 * (ax - 1.0);
    const double w_hi = 0.5;
    const double w0 = std::min(eps, w_hi);
    const GaussRule1D gj = gauss_jacobi_01(20, s);
    double acc = 0;
    for (size_t k = 0; k < gj.points.size(); ++k) {
      const double w = w0 * gj.points[k];
      acc += gj.weights[k] * std::pow(1.0 - w, s) * std::pow(ax - 1.0 + 2.0 * w, expo);
    }
    integral += std::pow(w0, s + 1.0) * acc;
    const GaussRule1D g = gauss_legendre(16);
    double lo = w0;
    while (lo < w_hi - 1e-300) {
      const double hi = std::min(w_hi, 2.0 * lo);
      for (size_t k = 0; k < g.points.size(); ++k) {
        const double w = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.points[k];
        const double wq = 0.5 * (hi - lo) * g.weights[k];
        integral += wq * std::pow(w, s) * std::pow(1.0 - w, s) * std::pow(ax - 1.0 + 2.0 * w, expo);
      }
      lo = hi;
    }
  }
  integral *= std::pow(2.0, 2.0 * s + 1.0);
  return -normalization_constant(1, s) * dirichlet_constant(s) * integral;
}

// ---------------------------------------------------------------------------
// scatter machinery shared by the parallel kernels
// ---------------------------------------------------------------------------

namespace {

struct ScatterBlock {
  int n = 0;
  std::array<int, 6> nodes{};
  std::array<std::array<double, 6>, 6> e{};
};

void scatter_upper(DenseMatrix& K, const ScatterBlock& blk) {
  for (int i = 0; i < blk.n; ++i)
    for (int j = i; j < blk.n; ++j) {
      const int p = blk.nodes[i], q = blk.nodes[j];
      if (p <= q)
        K(p, q) += blk.e[i][j];
      else
        K(q, p) += blk.e[i][j];
    }
}

void mirror_lower(DenseMatrix& K) {
  for (int i = 0; i < K.rows; ++i)
    for (int j = i + 1; j < K.cols; ++j) K(j, i) = K(i, j);
}

// deterministic parallel pair loop: blocks are computed in chunks, possibly
// concurrently, and scattered in pair order by a single pass
template <class Compute>
void wave_assemble(DenseMatrix& K, size_t n_pairs, bool parallel, Compute&& compute) {
  constexpr size_t chunk = 1024, wave = 32;
  const size_t n_chunks = (n_pairs + chunk - 1) / chunk;
  std::vector<std::vector<ScatterBlock>> bufs;
  for (size_t c0 = 0; c0 < n_chunks; c0 += wave) {
    const size_t c1 = std::min(n_chunks, c0 + wave);
    bufs.assign(c1 - c0, {});
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long c = static_cast<long>(c0); c < static_cast<long>(c1); ++c) {
      auto& buf = bufs[c - c0];
      const size_t k0 = c * chunk, k1 = std::min(n_pairs, k0 + chunk);
      for (size_t k = k0; k < k1; ++k) {
        ScatterBlock blk = compute(k);
        if (blk.n > 0) buf.push_back(blk);
      }
    }
    for (const auto& buf : bufs)
      for (const auto& blk : buf) scatter_upper(K, blk);
  }
}

// map linear index to the (a <= b) pair of an M-element upper triangle
inline void unrank_pair(size_t k, int M, int& a, int& b) {
  // row a holds M - a entries starting at offset a*M - a(a-1)/2
  const double Md = static_cast<double>(M);
  const double disc = std::max(0.0, (Md + 0.5) * (Md + 0.5) - 2.0 * static_cast<double>(k));
  int ar = static_cast<int>(Md + 0.5 - std::sqrt(disc));
  ar = std::clamp(ar, 0, M - 1);
  while (static_cast<size_t>(ar + 1) * M - static_cast<size_t>(ar + 1) * ar / 2 <= k) ++ar;
  while (ar > 0 && static_cast<size_t>(ar) * M - static_cast<size_t>(ar) * (ar - 1) / 2 > k) --ar;
  a = ar;
  b = a + static_cast<int>(k - (static_cast<size_t>(a) * M - static_cast<size_t>(a) * (a - 1) / 2));
}

// ---------------------------------------------------------------------------
// 1D kernels
// ---------------------------------------------------------------------------

PairTrace1D trace_of_node_1d(int node, int ea, int eb) {
  PairTrace1D t;
  if (node == ea) t.on_a = Trace1D::hat_left;
  else if (node == ea + 1) t.on_a = Trace1D::hat_right;
  if (node == eb) t.on_b = Trace1D::hat_left;
  else if (node == eb + 1) t.on_b = Trace1D::hat_right;
  return t;
}

ScatterBlock block_1d_pair(const Mesh1D& mesh, int a, int b, double s, double weight, int order,
                           bool fused_disjoint) {
  ScatterBlock blk;
  int cand[4] = {a, a + 1, b, b + 1};
  for (int c : cand) {
    bool seen = false;
    for (int i = 0; i < blk.n; ++i) seen |= (blk.nodes[i] == c);
    if (!seen) blk.nodes[blk.n++] = c;
  }
  const double a0 = mesh.elem_lo(a), a1 = mesh.elem_hi(a);
  const double b0 = mesh.elem_lo(b), b1 = mesh.elem_hi(b);
  const bool disjoint = (b0 > a1) || (a0 > b1);

  if (disjoint && fused_disjoint) {
    const double la = a1 - a0, lb = b1 - b0;
    const double gap = (b0 > a1) ? b0 - a1 : a0 - b1;
    const double ratio = std::max(la, lb) / gap;
    const int n = order > 0
                      ? order
                      : std::clamp(12 + 4 * static_cast<int>(std::ceil(std::log2(std::max(ratio, 1.0)))),
                                   12, 48);
    const GaussRule1D g = gauss_legendre(n);
    for (size_t k = 0; k < g.points.size(); ++k) {
      const double x = 0.5 * (a0 + a1) + 0.5 * la * g.points[k];
      const double hx[2] = {(a1 - x) / la, (x - a0) / la};
      for (size_t l = 0; l < g.points.size(); ++l) {
        const double y = 0.5 * (b0 + b1) + 0.5 * lb * g.points[l];
        const double hy[2] = {(b1 - y) / lb, (y - b0) / lb};
        const double ker = 0.25 * la * lb * g.weights[k] * g.weights[l] *
                           std::pow(std::fabs(x - y), -1.0 - 2.0 * s);
        const double D[4] = {hx[0], hx[1], -hy[0], -hy[1]};
        for (int p = 0; p < 4; ++p)
          for (int q = p; q < 4; ++q) blk.e[p][q] += ker * D[p] * D[q];
      }
    }
    for (int p = 0; p < 4; ++p)
      for (int q = p; q < 4; ++q) {
        blk.e[p][q] *= weight;
        blk.e[q][p] = blk.e[p][q];
      }
    return blk;
  }

  for (int i = 0; i < blk.n; ++i)
    for (int j = i; j < blk.n; ++j) {
      const double v = pair_integral_1d(a0, a1, b0, b1, s, trace_of_node_1d(blk.nodes[i], a, b),
                                        trace_of_node_1d(blk.nodes[j], a, b), order);
      blk.e[i][j] = weight * v;
      blk.e[j][i] = blk.e[i][j];
    }
  return blk;
}

// tail interactions of one omega element; same rule for moments and products
// so that the assembled rows sum to zero to rounding
void add_tail_1d(DenseMatrix& K, const Mesh1D& mesh, const FractionalParams& params) {
  const int N = mesh.n_nodes();
  const double lo = mesh.lambda_lo(), hi = mesh.lambda_hi();
  const GaussRule1D g = gauss_legendre(12);
  const double C = params.c_norm;
  for (int e = mesh.first_omega_elem; e < mesh.end_omega_elem; ++e) {
    const double e0 = mesh.elem_lo(e), e1 = mesh.elem_hi(e), len = e1 - e0;
    double blk[3][3] = {};
    for (size_t k = 0; k < g.points.size(); ++k) {
      const double x = 0.5 * (e0 + e1) + 0.5 * len * g.points[k];
      const double w = 0.5 * len * g.weights[k] * tail_weight_1d(x, params.s, lo, hi);
      const double phi[3] = {(e1 - x) / len, (x - e0) / len, -1.0};
      for (int p = 0; p < 3; ++p)
        for (int q = p; q < 3; ++q) blk[p][q] += w * phi[p] * phi[q];
    }
    const int idx[3] = {e, e + 1, N};
    for (int p = 0; p < 3; ++p)
      for (int q = p; q < 3; ++q) K(idx[p], idx[q]) += C * blk[p][q];
  }
}

DenseMatrix assemble_1d_generic(const Mesh1D& mesh, const FractionalParams& params,
                                const AssemblyOptions& opts, bool fused) {
  const int M = mesh.n_elements();
  const int size = mesh.n_nodes() + 1;
  DenseMatrix K(size, size);
  const double C = params.c_norm;
  const size_t n_pairs = static_cast<size_t>(M) * (M + 1) / 2;
  wave_assemble(K, n_pairs, opts.parallel, [&](size_t k) -> ScatterBlock {
    int a, b;
    unrank_pair(k, M, a, b);
    if (!mesh.elem_in_omega(a) && !mesh.elem_in_omega(b)) return {};
    const double w = (a == b) ? 0.5 * C : C;
    return block_1d_pair(mesh, a, b, params.s, w, opts.quad_order, fused);
  });
  add_tail_1d(K, mesh, params);
  mirror_lower(K);
  return K;
}

// uniform meshes: pair integrals depend only on the element-index gap
DenseMatrix assemble_1d_uniform(const Mesh1D& mesh, const FractionalParams& params,
                                const AssemblyOptions& opts) {
  const int M = mesh.n_elements();
  const int N = mesh.n_nodes();
  const double h = mesh.elem_len(0);
  const double s = params.s;
  const double C = params.c_norm;
  const int om_b = mesh.first_omega_elem, om_e = mesh.end_omega_elem;
  DenseMatrix K(N + 1, N + 1);

  // per-gap tables
  double ident[2][2];
  {
    const double slope[2] = {-1.0 / h, 1.0 / h};
    const double base = 2.0 * std::pow(h, 3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) ident[p][q] = slope[p] * slope[q] * base;
  }
  double adj[3][3];
  for (int p = 0; p < 3; ++p)
    for (int q = p; q < 3; ++q) {
      adj[p][q] = pair_integral_1d(0.0, h, h, 2.0 * h, s, trace_of_node_1d(p, 0, 1),
                                   trace_of_node_1d(q, 0, 1), opts.quad_order);
      adj[q][p] = adj[p][q];
    }

  using Block2 = std::array<double, 4>; // [alpha*2+beta]
  std::vector<Block2> X(M, Block2{}), P(M + 1, Block2{});
  const GaussRule1D g12 = gauss_legendre(opts.quad_order > 0 ? opts.quad_order : 12);
#pragma omp parallel for schedule(static) if (opts.parallel)
  for (int gp = 2; gp < M; ++gp) {
    // cross moments int int hat_al(x) hat_be(y) |x-y|^{-1-2s} over gap gp
    Block2 cx{};
    const double b0 = gp * h, b1 = (gp + 1) * h;
    for (size_t k = 0; k < g12.points.size(); ++k) {
      const double x = 0.5 * h + 0.5 * h * g12.points[k];
      const double hx[2] = {(h - x) / h, x / h};
      for (size_t l = 0; l < g12.points.size(); ++l) {
        const double y = 0.5 * (b0 + b1) + 0.5 * h * g12.points[l];
        const double hy[2] = {(b1 - y) / h, (y - b0) / h};
        const double ker = 0.25 * h * h * g12.weights[k] * g12.weights[l] *
                           std::pow(y - x, -1.0 - 2.0 * s);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) cx[2 * p + q] += ker * hx[p] * hy[q];
      }
    }
    X[gp] = cx;
  }
  std::vector<Block2> Z(M, Block2{});
#pragma omp parallel for schedule(static) if (opts.parallel)
  for (int gp = 2; gp < M; ++gp) {
    Block2 zz{};
    const double b0 = gp * h, b1 = (gp + 1) * h;
    for (size_t k = 0; k < g12.points.size(); ++k) {
      const double x = 0.5 * h + 0.5 * h * g12.points[k];
      const double hx[2] = {(h - x) / h, x / h};
      const double wtail = (std::pow(b0 - x, -2.0 * s) - std::pow(b1 - x, -2.0 * s)) / (2.0 * s);
      const double w = 0.5 * h * g12.weights[k] * wtail;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) zz[2 * p + q] += w * hx[p] * hx[q];
    }
    Z[gp] = zz;
  }
  for (int gp = 2; gp < M; ++gp)
    for (int c = 0; c < 4; ++c) P[gp][c] = P[gp - 1][c] + Z[gp][c];
  for (int c = 0; c < 4; ++c) P[M][c] = P[M - 1][c];
  auto prefix = [&](int glo, int ghi, int c) -> double { // sum of Z over gaps [glo, ghi]
    if (ghi < glo) return 0.0;
    ghi = std::min(ghi, M - 1);
    glo = std::max(glo, 2);
    if (ghi < glo) return 0.0;
    return P[ghi][c] - P[glo - 1][c];
  };

  // far cross contributions, one writer per row
#pragma omp parallel for schedule(dynamic, 64) if (opts.parallel)
  for (int p = 0; p <= N - 1; ++p) {
    double* Kp = K.row(p);
    for (int q = p; q <= N - 1; ++q) {
      double acc = 0;
      for (int a = p - 1; a <= p; ++a) {
        if (a < 0 || a >= M) continue;
        for (int b = q - 1; b <= q; ++b) {
          if (b < 0 || b >= M) continue;
          const int gp = b - a;
          if (gp < 2) continue;
          const bool valid = (a >= om_b && a < om_e) || (b >= om_b && b < om_e);
          if (!valid) continue;
          acc -= X[gp][2 * (p - a) + (q - b)];
        }
      }
      if (acc != 0.0) Kp[q] += C * acc;
    }
  }

  // band: identical and adjacent pairs, plus same-side products against all
  // valid far partners via the prefix sums
  for (int a = 0; a < M; ++a) {
    const bool a_om = (a >= om_b && a < om_e);
    if (a_om)
      for (int al = 0; al < 2; ++al)
        for (int be = al; be < 2; ++be) K(a + al, a + be) += 0.5 * C * ident[al][be];
    if (a + 1 < M && (a_om || (a + 1 >= om_b && a + 1 < om_e)))
      for (int al = 0; al < 3; ++al)
        for (int be = al; be < 3; ++be) K(a + al, a + be) += C * adj[al][be];
    int rlo, rhi, llo, lhi;
    if (a_om) {
      rlo = a + 2; rhi = M - 1; llo = 0; lhi = a - 2;
    } else {
      rlo = std::max(a + 2, om_b); rhi = om_e - 1;
      llo = om_b; lhi = std::min(a - 2, om_e - 1);
    }
    for (int al = 0; al < 2; ++al)
      for (int be = al; be < 2; ++be) {
        double ssum = prefix(rlo - a, rhi - a, 2 * al + be);
        ssum += prefix(a - lhi, a - llo, 2 * (1 - al) + (1 - be)); // mirrored gaps
        if (ssum != 0.0) K(a + al, a + be) += C * ssum;
      }
  }

  add_tail_1d(K, mesh, params);
  mirror_lower(K);
  return K;
}

// ---------------------------------------------------------------------------
// 2D kernels
// ---------------------------------------------------------------------------

void add_tail_2d(DenseMatrix& K, const TriMesh2D& mesh, const FractionalParams& params) {
  const int N = mesh.n_nodes();
  const double R = mesh.ext_radius;
  const TriangleRule rule = triangle_rule(6);
  const double C = params.c_norm;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (!mesh.tri_in_omega(t)) continue;
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.points[tri[0]];
    const auto& p1 = mesh.points[tri[1]];
    const auto& p2 = mesh.points[tri[2]];
    const double jac = 2.0 * mesh.tri_area(t);
    double blk[4][4] = {};
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const double xi = rule.points[k][0], et = rule.points[k][1];
      const double x = p0[0] + xi * (p1[0] - p0[0]) + et * (p2[0] - p0[0]);
      const double y = p0[1] + xi * (p1[1] - p0[1]) + et * (p2[1] - p0[1]);
      const double w = rule.weights[k] * jac * tail_weight_2d(std::hypot(x, y), params.s, R);
      const double phi[4] = {1.0 - xi - et, xi, et, -1.0};
      for (int p = 0; p < 4; ++p)
        for (int q = p; q < 4; ++q) blk[p][q] += w * phi[p] * phi[q];
    }
    const int idx[4] = {tri[0], tri[1], tri[2], N};
    for (int p = 0; p < 4; ++p)
      for (int q = p; q < 4; ++q) {
        const int i = idx[p], j = idx[q];
        if (i <= j)
          K(i, j) += C * blk[p][q];
        else
          K(j, i) += C * blk[p][q];
      }
  }
}

DenseMatrix assemble_2d(const TriMesh2D& mesh, const FractionalParams& params,
                        const AssemblyOptions& opts) {
  const int M = mesh.n_triangles();
  const int size = mesh.n_nodes() + 1;
  DenseMatrix K(size, size);
  const double C = params.c_norm;
  const size_t n_pairs = static_cast<size_t>(M) * (M + 1) / 2;
  wave_assemble(K, n_pairs, opts.parallel, [&](size_t k) -> ScatterBlock {
    int a, b;
    unrank_pair(k, M, a, b);
    if (!mesh.tri_in_omega(a) && !mesh.tri_in_omega(b)) return {};
    const double w = (a == b) ? 0.5 * C : C;
    const PairBlock2D pb = pair_integral_2d(mesh, a, b, params.s, opts.quad_order);
    ScatterBlock blk;
    blk.n = pb.n_nodes;
    for (int i = 0; i < pb.n_nodes; ++i) blk.nodes[i] = pb.nodes[i];
    for (int i = 0; i < pb.n_nodes; ++i)
      for (int j = 0; j < pb.n_nodes; ++j) blk.e[i][j] = w * pb.entry[i][j];
    return blk;
  });
  add_tail_2d(K, mesh, params);
  mirror_lower(K);
  return K;
}

} // namespace

DenseMatrix assemble_stiffness(const Mesh1D& mesh, const FractionalParams& params,
                               const AssemblyOptions& opts) {
  if (params.d != 1) throw std::invalid_argument("assemble_stiffness: params.d mismatch with 1D mesh");
  if (mesh.is_uniform()) return assemble_1d_uniform(mesh, params, opts);
  return assemble_1d_generic(mesh, params, opts, true);
}

DenseMatrix assemble_stiffness(const TriMesh2D& mesh, const FractionalParams& params,
                               const AssemblyOptions& opts) {
  if (params.d != 2) throw std::invalid_argument("assemble_stiffness: params.d mismatch with 2D mesh");
  return assemble_2d(mesh, params, opts);
}

DenseMatrix assemble_stiffness_serial(const Mesh1D& mesh, const FractionalParams& params,
                                      int quad_order) {
  if (params.d != 1) throw std::invalid_argument("assemble_stiffness_serial: dimension mismatch");
  const int M = mesh.n_elements();
  DenseMatrix K(mesh.n_nodes() + 1, mesh.n_nodes() + 1);
  const double C = params.c_norm;
  for (int a = 0; a < M; ++a)
    for (int b = a; b < M; ++b) {
      if (!mesh.elem_in_omega(a) && !mesh.elem_in_omega(b)) continue;
      const double w = (a == b) ? 0.5 * C : C;
      scatter_upper(K, block_1d_pair(mesh, a, b, params.s, w, quad_order, false));
    }
  add_tail_1d(K, mesh, params);
  mirror_lower(K);
  return K;
}

DenseMatrix assemble_stiffness_serial(const TriMesh2D& mesh, const FractionalParams& params,
                                      int quad_order) {
  if (params.d != 2) throw std::invalid_argument("assemble_stiffness_serial: dimension mismatch");
  const int M = mesh.n_triangles();
  DenseMatrix K(mesh.n_nodes() + 1, mesh.n_nodes() + 1);
  const double C = params.c_norm;
  for (int a = 0; a < M; ++a)
    for (int b = a; b < M; ++b) {
      if (!mesh.tri_in_omega(a) && !mesh.tri_in_omega(b)) continue;
      const double w = (a == b) ? 0.5 * C : C;
      const PairBlock2D pb = pair_integral_2d(mesh, a, b, params.s, quad_order);
      ScatterBlock blk;
      blk.n = pb.n_nodes;
      for (int i = 0; i < pb.n_nodes; ++i) blk.nodes[i] = pb.nodes[i];
      for (int i = 0; i < pb.n_nodes; ++i)
        for (int j = 0; j < pb.n_nodes; ++j) blk.e[i][j] = w * pb.entry[i][j];
      scatter_upper(K, blk);
    }
  add_tail_2d(K, mesh, params);
  mirror_lower(K);
  return K;
}

DenseMatrix assemble_mass(const Mesh1D& mesh) {
  const int size = mesh.n_nodes() + 1;
  DenseMatrix Mm(size, size);
  for (int e = mesh.first_omega_elem; e < mesh.end_omega_elem; ++e) {
    const double len = mesh.elem_len(e);
    Mm(e, e) += len / 3.0;
    Mm(e, e + 1) += len / 6.0;
    Mm(e + 1, e) += len / 6.0;
    Mm(e + 1, e + 1) += len / 3.0;
  }
  return Mm;
}

DenseMatrix assemble_mass(const TriMesh2D& mesh) {
  const int size = mesh.n_nodes() + 1;
  DenseMatrix Mm(size, size);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (!mesh.tri_in_omega(t)) continue;
    const double a12 = mesh.tri_area(t) / 12.0;
    const auto& tri = mesh.triangles[t];
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) Mm(tri[p], tri[q]) += (p == q) ? 2.0 * a12 : a12;
  }
  return Mm;
}

namespace {

double eval_source_1d(const SourceSpec& f, double x) {
  switch (f.kind) {
    case SourceSpec::Kind::constant: return f.value;
    case SourceSpec::Kind::callable:
      if (!f.fn1) throw std::invalid_argument("SourceSpec: missing 1D callable");
      return f.fn1(x);
    default: throw std::logic_error("eval_source_1d: grid handled separately");
  }
}

double eval_flux_1d(const FluxSpec& g, double x, double s) {
  switch (g.kind) {
    case FluxSpec::Kind::zero: return 0.0;
    case FluxSpec::Kind::power_law:
      return -g.amplitude * std::pow(std::fabs(x), -(1.0 + g.decay_exponent));
    case FluxSpec::Kind::manufactured_1d: return manufactured_flux_1d(x, s);
    case FluxSpec::Kind::callable:
      if (!g.fn1) throw std::invalid_argument("FluxSpec: missing 1D callable");
      return g.fn1(x);
  }
  return 0.0;
}

// one-sided integral of g over (L, infinity)
double flux_tail_one_side_1d(const FluxSpec& g, double L, double s) {
  switch (g.kind) {
    case FluxSpec::Kind::zero: return 0.0;
    case FluxSpec::Kind::power_law:
      return -g.amplitude * std::pow(L, -g.decay_exponent) / g.decay_exponent;
    case FluxSpec::Kind::manufactured_1d: {
      auto f = [&](double t) { return manufactured_flux_1d(L / t, s) / (t * t); };
      return L * integrate_graded(f, 0.0, 1.0, 40, 12);
    }
    case FluxSpec::Kind::callable: {
      TailSpec tl = g.tail;
      if (tl.kind == TailSpec::Kind::zero) return 0.0;
      if (tl.kind == TailSpec::Kind::power_law)
        return -tl.amplitude * std::pow(L, -tl.decay_exponent) / tl.decay_exponent;
      auto f = [&](double t) { return tl.radial(L / t) / (t * t); };
      return L * integrate_graded(f, 0.0, 1.0, 40, 12);
    }
  }
  return 0.0;
}

} // namespace

Vector assemble_load(const Mesh1D& mesh, const SourceSpec& f, const FluxSpec& g,
                     const FractionalParams& params, const AssemblyOptions& opts) {
  const int N = mesh.n_nodes();
  Vector L(N + 1, 0.0);
  const int nf = std::max(12, f.quad_order > 0 ? f.quad_order : opts.quad_order);
  const GaussRule1D gl = gauss_legendre(nf);

  if (g.kind == FluxSpec::Kind::manufactured_1d) {
    // g leaves L^2 at s = 1/2 but the load moments stay finite up to the
    // borderline case, which the convergence study exercises
    if (params.s > 0.5)
      throw std::domain_error("assemble_load: manufactured flux is not square-integrable for s > 1/2");
    if (std::fabs(mesh.omega_a + 1.0) > 1e-12 || std::fabs(mesh.omega_b - 1.0) > 1e-12)
      throw std::invalid_argument("assemble_load: manufactured flux assumes omega = (-1,1)");
  }

  // F: source over omega elements
  if (f.kind == SourceSpec::Kind::grid) {
    if (static_cast<int>(f.grid_values.size()) < N)
      throw std::invalid_argument("assemble_load: grid source size mismatch");
    for (int e = mesh.first_omega_elem; e < mesh.end_omega_elem; ++e) {
      const double len = mesh.elem_len(e);
      const double c0 = f.grid_values[e], c1 = f.grid_values[e + 1];
      L[e] += len * (c0 / 3.0 + c1 / 6.0);
      L[e + 1] += len * (c0 / 6.0 + c1 / 3.0);
    }
  } else {
    for (int e = mesh.first_omega_elem; e < mesh.end_omega_elem; ++e) {
      const double e0 = mesh.elem_lo(e), e1 = mesh.elem_hi(e), len = e1 - e0;
      for (size_t k = 0; k < gl.points.size(); ++k) {
        const double x = 0.5 * (e0 + e1) + 0.5 * len * gl.points[k];
        const double w = 0.5 * len * gl.weights[k] * eval_source_1d(f, x);
        L[e] += w * (e1 - x) / len;
        L[e + 1] += w * (x - e0) / len;
      }
    }
  }

  // G: flux over exterior elements
  if (g.kind != FluxSpec::Kind::zero) {
    for (int e = 0; e < mesh.n_elements(); ++e) {
      if (mesh.elem_in_omega(e)) continue;
      const double e0 = mesh.elem_lo(e), e1 = mesh.elem_hi(e), len = e1 - e0;
      const bool at_boundary = (e + 1 == mesh.first_omega_elem) || (e == mesh.end_omega_elem);
      if (g.kind == FluxSpec::Kind::manufactured_1d && at_boundary) {
        const FluxMoments fm = boundary_flux_moments_1d(len, params.s);
        if (e == mesh.end_omega_elem) { // [b, b+h], hat node at b
          L[e] += fm.m_hat;
          L[e + 1] += fm.m_far;
        } else { // [a-h, a], hat node at a
          L[e + 1] += fm.m_hat;
          L[e] += fm.m_far;
        }
        continue;
      }
      for (size_t k = 0; k < gl.points.size(); ++k) {
        const double x = 0.5 * (e0 + e1) + 0.5 * len * gl.points[k];
        const double w = 0.5 * len * gl.weights[k] * eval_flux_1d(g, x, params.s);
        L[e] += w * (e1 - x) / len;
        L[e + 1] += w * (x - e0) / len;
      }
    }
    L[N] += flux_tail_one_side_1d(g, mesh.lambda_hi(), params.s) +
            flux_tail_one_side_1d(g, -mesh.lambda_lo(), params.s);
  }
  return L;
}

Vector assemble_load(const TriMesh2D& mesh, const SourceSpec& f, const FluxSpec& g,
                     const FractionalParams& params, const AssemblyOptions& opts) {
  const int N = mesh.n_nodes();
  Vector L(N + 1, 0.0);
  const TriangleRule rule = triangle_rule(std::max(6, opts.quad_order));
  if (g.kind == FluxSpec::Kind::manufactured_1d)
    throw std::invalid_argument("assemble_load: manufactured flux is one-dimensional");

  auto source_at = [&](double x, double y) -> double {
    switch (f.kind) {
      case SourceSpec::Kind::constant: return f.value;
      case SourceSpec::Kind::callable:
        if (!f.fn2) throw std::invalid_argument("SourceSpec: missing 2D callable");
        return f.fn2(x, y);
      default: throw std::invalid_argument("assemble_load: 2D grid source unsupported");
    }
  };
  auto flux_at = [&](double x, double y) -> double {
    switch (g.kind) {
      case FluxSpec::Kind::zero: return 0.0;
      case FluxSpec::Kind::power_law:
        return -g.amplitude * std::pow(std::hypot(x, y), -(2.0 + g.decay_exponent));
      case FluxSpec::Kind::callable:
        if (!g.fn2) throw std::invalid_argument("FluxSpec: missing 2D callable");
        return g.fn2(x, y);
      default: return 0.0;
    }
  };

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const bool om = mesh.tri_in_omega(t);
    if (!om && g.kind == FluxSpec::Kind::zero) continue;
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.points[tri[0]];
    const auto& p1 = mesh.points[tri[1]];
    const auto& p2 = mesh.points[tri[2]];
    const double jac = 2.0 * mesh.tri_area(t);
    for (size_t k = 0; k < rule.points.size(); ++k) {
      const double xi = rule.points[k][0], et = rule.points[k][1];
      const double x = p0[0] + xi * (p1[0] - p0[0]) + et * (p2[0] - p0[0]);
      const double y = p0[1] + xi * (p1[1] - p0[1]) + et * (p2[1] - p0[1]);
      const double w = rule.weights[k] * jac * (om ? source_at(x, y) : flux_at(x, y));
      L[tri[0]] += w * (1.0 - xi - et);
      L[tri[1]] += w * xi;
      L[tri[2]] += w * et;
    }
  }
  if (g.kind != FluxSpec::Kind::zero) {
    TailSpec tail = g.tail;
    if (g.kind == FluxSpec::Kind::power_law && tail.kind == TailSpec::Kind::zero)
      tail = TailSpec::power_law(g.amplitude, g.decay_exponent);
    L[N] += tail_flux_integral(tail, mesh.ext_radius, 2);
  }
  return L;
}

LinearSystem assemble_system(std::shared_ptr<const Mesh1D> mesh, const SourceSpec& f,
                             const FluxSpec& g, const FractionalParams& params,
                             const AssemblyOptions& opts) {
  LinearSystem sys;
  sys.params = params;
  sys.mesh1d = mesh;
  sys.stiffness = assemble_stiffness(*mesh, params, opts);
  sys.mass = assemble_mass(*mesh);
  sys.load = assemble_load(*mesh, f, g, params, opts);
  return sys;
}

LinearSystem assemble_system(std::shared_ptr<const TriMesh2D> mesh, const SourceSpec& f,
                             const FluxSpec& g, const FractionalParams& params,
                             const AssemblyOptions& opts) {
  LinearSystem sys;
  sys.params = params;
  sys.mesh2d = mesh;
  sys.stiffness = assemble_stiffness(*mesh, params, opts);
  sys.mass = assemble_mass(*mesh);
  sys.load = assemble_load(*mesh, f, g, params, opts);
  return sys;
}

} // namespace fracfem
