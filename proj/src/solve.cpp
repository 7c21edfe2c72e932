#include "fracfem/solve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracfem {

double DiscreteSolution::evaluate(double x) const {
  if (!mesh1d) throw std::logic_error("DiscreteSolution::evaluate: not a 1D solution");
  const auto& nodes = mesh1d->nodes;
  if (x <= nodes.front() || x >= nodes.back()) return coeff.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const int e = std::max(0, static_cast<int>(it - nodes.begin()) - 1);
  const double x0 = nodes[e], x1 = nodes[e + 1];
  const double t = (x - x0) / (x1 - x0);
  return (1.0 - t) * coeff[e] + t * coeff[e + 1];
}

double DiscreteSolution::evaluate(double x, double y) const {
  if (!mesh2d) throw std::logic_error("DiscreteSolution::evaluate: not a 2D solution");
  const auto& m = *mesh2d;
  if (std::hypot(x, y) >= m.ext_radius) return coeff.back();
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const auto& p0 = m.points[tri[0]];
    const auto& p1 = m.points[tri[1]];
    const auto& p2 = m.points[tri[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double l1 = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det;
    const double l2 = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det;
    const double l0 = 1.0 - l1 - l2;
    const double eps = -1e-12;
    if (l0 >= eps && l1 >= eps && l2 >= eps)
      return l0 * coeff[tri[0]] + l1 * coeff[tri[1]] + l2 * coeff[tri[2]];
  }
  return coeff.back(); // outside the meshed polygon but inside the bounding circle
}

namespace {

DenseMatrix combine(const DenseMatrix& K, const DenseMatrix& M, double alpha) {
  DenseMatrix A = K;
  for (size_t i = 0; i < A.a.size(); ++i) A.a[i] += alpha * M.a[i];
  return A;
}

Vector residual(const DenseMatrix& K, const DenseMatrix& M, double alpha, const Vector& U,
                const Vector& rhs) {
  Vector KU = matvec(K, U), MU = matvec(M, U);
  Vector r(rhs.size());
  for (size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - KU[i] - alpha * MU[i];
  return r;
}

double norm2(const Vector& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

} // namespace

DiscreteSolution solve_stationary(const LinearSystem& system, const SolveOptions& opts) {
  const double alpha = system.params.alpha;
  if (!(alpha > 0.0))
    throw std::invalid_argument("solve_stationary: alpha = 0 is not supported (solution only "
                                "unique up to constants)");
  const int n = system.n_dof();
  Vector U = system.load;

  if (opts.use_cg) {
    DenseMatrix A = combine(system.stiffness, system.mass, alpha);
    Vector x(n, 0.0);
    cg_solve(A, system.load, x, opts.cg_tol, 10 * n);
    U = x;
  } else {
    DenseMatrix A = combine(system.stiffness, system.mass, alpha);
    cholesky_inplace(A);
    cholesky_solve(A, U);
    // one step of iterative refinement; the factor is reused
    Vector r = residual(system.stiffness, system.mass, alpha, U, system.load);
    const double rhs_norm = norm2(system.load);
    if (rhs_norm > 0 && norm2(r) > 1e-12 * rhs_norm) {
      cholesky_solve(A, r);
      for (int i = 0; i < n; ++i) U[i] += r[i];
    }
  }

  const double rhs_norm = norm2(system.load);
  const double res = norm2(residual(system.stiffness, system.mass, alpha, U, system.load));
  if (rhs_norm > 0 && res > 1e-10 * rhs_norm)
    throw std::runtime_error("solve_stationary: residual " + std::to_string(res / rhs_norm) +
                             " exceeds tolerance");

  DiscreteSolution u;
  u.coeff = std::move(U);
  u.mesh1d = system.mesh1d;
  u.mesh2d = system.mesh2d;
  u.params = system.params;
  return u;
}

namespace {

// L2(Omega) projection of u0 onto the Omega-supported hat functions
Vector project_initial(const Mesh1D& mesh, const DenseMatrix& M, const SourceSpec& u0,
                       int quad_order) {
  const int N = mesh.n_nodes();
  std::vector<int> om_nodes;
  for (int i = 0; i < N; ++i)
    if (mesh.node_region[i] != NodeRegion::exterior) om_nodes.push_back(i);
  const int n = static_cast<int>(om_nodes.size());

  Vector b(n, 0.0);
  const GaussRule1D g = gauss_legendre(std::max(12, quad_order));
  auto u0_at = [&](double x) -> double {
    switch (u0.kind) {
      case SourceSpec::Kind::constant: return u0.value;
      case SourceSpec::Kind::callable: return u0.fn1(x);
      default: throw std::invalid_argument("solve_heat: grid initial data unsupported");
    }
  };
  std::vector<int> global_to_local(N, -1);
  for (int i = 0; i < n; ++i) global_to_local[om_nodes[i]] = i;
  for (int e = mesh.first_omega_elem; e < mesh.end_omega_elem; ++e) {
    const double e0 = mesh.elem_lo(e), e1 = mesh.elem_hi(e), len = e1 - e0;
    for (size_t k = 0; k < g.points.size(); ++k) {
      const double x = 0.5 * (e0 + e1) + 0.5 * len * g.points[k];
      const double w = 0.5 * len * g.weights[k] * u0_at(x);
      b[global_to_local[e]] += w * (e1 - x) / len;
      b[global_to_local[e + 1]] += w * (x - e0) / len;
    }
  }
  DenseMatrix Mom(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Mom(i, j) = M(om_nodes[i], om_nodes[j]);
  cholesky_inplace(Mom);
  cholesky_solve(Mom, b);
  Vector U(N + 1, 0.0);
  for (int i = 0; i < n; ++i) U[om_nodes[i]] = b[i];
  return U;
}

} // namespace

HeatResult solve_heat(std::shared_ptr<const Mesh1D> mesh, const FractionalParams& params,
                      const HeatConfig& cfg, const AssemblyOptions& opts) {
  if (!(cfg.dt > 0)) throw std::invalid_argument("solve_heat: dt must be positive");
  if (!(cfg.t_final >= cfg.dt)) throw std::invalid_argument("solve_heat: need dt <= t_final");
  const int N = mesh->n_nodes();

  DenseMatrix K = assemble_stiffness(*mesh, params, opts);
  DenseMatrix M = assemble_mass(*mesh);
  DenseMatrix A = combine(K, M, 1.0 / cfg.dt);
  cholesky_inplace(A);

  Vector U = project_initial(*mesh, M, cfg.u0, opts.quad_order);

  HeatResult out;
  auto push = [&](double t, const Vector& coeff) {
    DiscreteSolution sol;
    sol.coeff = coeff;
    sol.mesh1d = mesh;
    sol.params = params;
    out.times.push_back(t);
    out.states.push_back(std::move(sol));
  };
  push(0.0, U);

  const int n_steps = static_cast<int>(std::lround(cfg.t_final / cfg.dt));
  for (int step = 1; step <= n_steps; ++step) {
    Vector rhs = matvec(M, U);
    for (double& v : rhs) v /= cfg.dt;
    cholesky_solve(A, rhs);
    U = std::move(rhs);
    if (step % std::max(1, cfg.stride) == 0 || step == n_steps) push(step * cfg.dt, U);
  }
  return out;
}

} // namespace fracfem
