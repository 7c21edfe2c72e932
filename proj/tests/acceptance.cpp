// Acceptance suite: one pass/fail line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "fracfem/analysis.hpp"
#include "fracfem/experiments.hpp"
#include "fracfem/solve.hpp"
#include "fracfem/special_functions.hpp"
#include "oracles.hpp"

using namespace fracfem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const double t0 = now();
  bool ok = true;
  std::string detail;
  for (double s : {0.25, 0.5, 0.75}) {
    const FractionalParams params(1, s, 1.0);
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, 1.0, 0.01));
    const LinearSystem sys =
        assemble_system(mesh, SourceSpec::constant(1.0), FluxSpec::zero(), params);
    const DiscreteSolution u = solve_stationary(sys);
    double worst = 0;
    for (double c : u.coeff) worst = std::max(worst, std::fabs(c - 1.0));
    detail += "s=" + fmt(s) + " max|U-1|=" + fmt(worst) + "  ";
    ok = ok && worst <= 1e-6;
  }
  const double dt = now() - t0;
  ok = ok && dt < 10.0;
  report(1, ok, "exact constant solution u == 1", detail + "runtime " + fmt(dt) + "s");
}

void criterion_2() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  bool ok = true;
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const double s = 0.1 + 0.8 * uni(rng);
    const double alpha = 0.5 + 1.5 * uni(rng);
    const double fc = -1.0 + 2.0 * uni(rng);
    const double A = 0.25 + uni(rng), p = 0.4 + 2.0 * uni(rng);
    const FractionalParams params(1, s, alpha);
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, 1.0, 0.02));
    const LinearSystem sys =
        assemble_system(mesh, SourceSpec::constant(fc), FluxSpec::power_law(A, p), params);
    const DiscreteSolution u = solve_stationary(sys);
    const double expected = (2.0 * fc - 2.0 * A / p) / (alpha * 2.0);
    const double err = std::fabs(omega_mean(u) - expected) / std::max(std::fabs(expected), 1e-3);
    worst = std::max(worst, err);
    ok = ok && err <= 1e-8;
  }
  report(2, ok, "discrete mean preservation on 10 random configurations",
         "worst relative defect " + fmt(worst));
}

void criterion_3() {
  bool ok = true;
  std::string detail;
  const std::vector<double> hs = {1.0 / 250, 1.0 / 500, 1.0 / 1000, 1.0 / 2000};
  for (double s : {0.2, 0.3, 0.4, 0.5}) {
    const double t0 = now();
    const FractionalParams params(1, s, 1.0);
    std::vector<double> el2, ehs;
    for (double h : hs) {
      auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, 1.2, h));
      SourceSpec f = SourceSpec::callable_1d([s](double x) {
        const double r = 1.0 - x * x;
        return 1.0 + (r <= 0 ? 0.0 : dirichlet_constant(s) * std::pow(r, s));
      });
      const LinearSystem sys = assemble_system(mesh, f, FluxSpec::manufactured(), params);
      const DiscreteSolution u = solve_stationary(sys);
      auto exact = [s](double x) {
        const double r = 1.0 - x * x;
        return r <= 0 ? 0.0 : dirichlet_constant(s) * std::pow(r, s);
      };
      el2.push_back(l2_error_omega(u, exact));
      ehs.push_back(hs_error_omega_1d(u, exact, s).full);
    }
    const double slope_l2 = fit_rate(hs, el2).slope;
    const double slope_hs = fit_rate(hs, ehs).slope;
    const bool pass_s =
        std::fabs(slope_l2 - (s + 0.5)) <= 0.15 && std::fabs(slope_hs - 0.5) <= 0.15;
    detail += "s=" + fmt(s) + ": L2 " + fmt(slope_l2) + " (want " + fmt(s + 0.5) + "), Hs " +
              fmt(slope_hs) + " (want 0.5), " + fmt(now() - t0) + "s; ";
    ok = ok && pass_s;
  }
  report(3, ok, "1D convergence rates (L2 ~ s+1/2, Hs ~ 1/2, tolerance 0.15)", detail);
}

void criterion_4() {
  struct Case {
    double s;
    const char* name;
    SourceSpec f;
    FluxSpec g;
    double expect;
  };
  std::vector<Case> cases;
  cases.push_back({0.3, "g0", parse_source("sin-pi"), FluxSpec::zero(), 2.96});
  cases.push_back({0.3, "g1", SourceSpec::constant(1.0), FluxSpec::power_law(1.0, 1.0), 3.07});
  cases.push_back({0.8, "g0", parse_source("sin-pi"), FluxSpec::zero(), 3.84});
  cases.push_back({0.8, "g1", SourceSpec::constant(1.0), FluxSpec::power_law(1.0, 1.0), 3.44});
  const std::vector<double> Hs = {0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    TruncationProblem prob{c.f, c.g, FractionalParams(1, c.s, 1.0)};
    const TruncationResult res = truncation_study(prob, Hs, 1.0 / 500);
    const bool pass_c = std::fabs(res.exponent_c - c.expect) <= 0.4;
    detail += "s=" + fmt(c.s) + "/" + c.name + ": c=" + fmt(res.exponent_c) + " (paper " +
              fmt(c.expect) + "); ";
    ok = ok && pass_c;
  }
  report(4, ok, "truncation exponents within 0.4 of the reported values", detail);
}

void criterion_5() {
  const double t0 = now();
  const FractionalParams params(2, 0.5, 1.0);
  auto mesh = std::make_shared<TriMesh2D>(build_disk_mesh_2d(1.0, 64.0, 0.1, 3.0));
  const LinearSystem sys = assemble_system(mesh, SourceSpec::constant(2.0),
                                           FluxSpec::power_law(1.0, 1.0), params);
  const DiscreteSolution u = solve_stationary(sys);
  const double tail = u.tail_value();
  const bool ok = std::fabs(tail - (-2.0)) <= 0.05 && (now() - t0) < 1800.0;
  report(5, ok, "2D asymptotic value at s = 0.5 (target -2 within 0.05)",
         "U_{N+1} = " + fmt(tail) + ", mean = " + fmt(omega_mean(u)) + ", triangles = " +
             fmt(mesh->n_triangles()) + ", runtime " + fmt(now() - t0) + "s");
}

void criterion_6() {
  bool ok = true;
  std::string detail;
  const std::vector<double> radii = {8.0, 16.0, 32.0};
  for (double s : {0.1, 0.9}) {
    const FractionalParams params(2, s, 1.0);
    std::vector<double> tails;
    for (double R : radii) {
      auto mesh = std::make_shared<TriMesh2D>(build_disk_mesh_2d(1.0, R, 0.1, 3.0));
      const LinearSystem sys = assemble_system(mesh, SourceSpec::constant(2.0),
                                               FluxSpec::power_law(1.0, 1.0), params);
      tails.push_back(solve_stationary(sys).tail_value());
    }
    detail += "s=" + fmt(s) + ": tails " + fmt(tails[0]) + ", " + fmt(tails[1]) + ", " +
              fmt(tails[2]) + "; ";
    if (s < 0.5) {
      ok = ok && std::fabs(tails[1]) < std::fabs(tails[0]) &&
           std::fabs(tails[2]) < std::fabs(tails[1]);
    } else {
      ok = ok && tails[0] < 0 && tails[1] < 0 && tails[2] < 0 &&
           std::fabs(tails[1]) > std::fabs(tails[0]) && std::fabs(tails[2]) > std::fabs(tails[1]);
    }
  }
  report(6, ok, "2D tail monotonicity in the outer radius (s = 0.1 and 0.9)", detail);
}

void criterion_7() {
  bool ok = true;
  std::string detail;
  for (double s : {0.3, 0.5, 0.8}) {
    const FractionalParams params(1, s, 1.0);
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, 2.0, 0.01));
    HeatConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 1.0;
    cfg.u0 = SourceSpec::callable_1d([](double x) { return std::fabs(x) <= 0.5 ? 1.0 : 0.0; });
    const HeatResult res = solve_heat(mesh, params, cfg);
    double mass0 = 0, drift = 0;
    std::vector<double> ts, errs;
    for (size_t n = 0; n < res.states.size(); ++n) {
      const double mass = omega_mean(res.states[n]) * 2.0;
      if (n == 0) mass0 = mass;
      drift = std::max(drift, std::fabs(mass - mass0) / std::fabs(mass0));
      if (res.times[n] >= 0.1 - 1e-12 && res.times[n] <= 1.0 + 1e-12) {
        ts.push_back(res.times[n]);
        errs.push_back(l2_error_omega(res.states[n], [](double) { return 0.5; }));
      }
    }
    // linear fit of log(err) vs t
    const int n = static_cast<int>(ts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      const double y = std::log(errs[i]);
      sx += ts[i];
      sy += y;
      sxx += ts[i] * ts[i];
      sxy += ts[i] * y;
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (int i = 0; i < n; ++i) {
      const double y = std::log(errs[i]);
      ss_res += (y - intercept - slope * ts[i]) * (y - intercept - slope * ts[i]);
      ss_tot += (y - ybar) * (y - ybar);
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    detail += "s=" + fmt(s) + ": drift=" + fmt(drift) + " decay=" + fmt(slope) + " R2=" + fmt(r2) +
              "; ";
    ok = ok && drift <= 1e-10 && r2 >= 0.99 && slope < 0;
  }
  report(7, ok, "heat equation: mass conservation and exponential decay", detail);
}

void criterion_8() {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  bool ok = true;
  std::string detail;

  { // appendix integrals vs adaptive quadrature of the defining forms
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const double eta = uni(rng);
      const double s = 0.05 + 0.9 * uni(rng);
      const AppendixIntegrals v = appendix_integrals(eta, s);
      auto graded01 = [&](const std::function<double(double)>& f) {
        double acc = 0, width = 1.0;
        for (int k = 0; k < 46; ++k) width *= 0.5;
        double lo = 0.0, hi = width;
        while (true) {
          acc += oracle::adaptive(f, lo, hi, 1e-13, 24);
          if (hi >= 1.0) break;
          lo = hi;
          hi = std::min(1.0, 2.0 * hi);
        }
        return acc;
      };
      const double o1 = graded01(
          [&](double xi) { return std::pow(1.0 - xi * eta, s) * (1.0 - xi) * std::pow(xi, -s); });
      const double o2 = graded01(
          [&](double xi) { return std::pow(1.0 - xi, s) * (1.0 - eta * xi) * std::pow(xi, -s); });
      const double o3 =
          graded01([&](double xi) { return std::pow(1.0 - xi * eta, s) * std::pow(xi, 1.0 - s); });
      const double o4 = eta * graded01([&](double xi) {
        return std::pow(1.0 - xi, s) * std::pow(xi, 1.0 - s);
      });
      worst = std::max({worst, std::fabs(v.i1 - o1), std::fabs(v.i2 - o2), std::fabs(v.i3 - o3),
                        std::fabs(v.i4 - o4)});
    }
    ok = ok && worst <= 1e-9;
    detail += "I1..I4 (50 samples): worst abs dev " + fmt(worst) + "; ";
  }

  { // the I3/I4 beta-identity discrepancy, resolved by the oracle
    const double s = 0.5;
    const AppendixIntegrals v = appendix_integrals(1.0, s);
    const double shifted = beta_fn(2.0 - s, 1.0 + s);   // eta B(2-s, 1+s) at eta = 1
    const double unshifted = beta_fn(1.0 - s, s);       // the identity printed in the text
    std::printf("    note: I4(1; 0.5) = %.9f matches eta*B(2-s,1+s) = %.9f, not eta*B(1-s,s) = "
                "%.9f; the defining integral is authoritative\n",
                v.i4, shifted, unshifted);
    ok = ok && std::fabs(v.i4 - shifted) < 1e-9 && std::fabs(v.i4 - unshifted) > 1.0;
  }

  { // boundary flux moments vs nested adaptive oracle
    double worst = 0;
    for (int trial = 0; trial < 8; ++trial) {
      const double s = 0.08 + 0.4 * uni(rng);
      const double h = std::pow(10.0, -1.0 - 2.0 * uni(rng));
      const FluxMoments fm = boundary_flux_moments_1d(h, s);
      auto g_raw = [&](double x) {
        auto inner = [&](double y) {
          return std::pow(1.0 - y * y, s) * std::pow(x - y, -1.0 - 2.0 * s);
        };
        double acc = oracle::adaptive(inner, -1.0, 0.0, 1e-13, 50);
        double width = 1.0;
        for (int k = 0; k < 46; ++k) width *= 0.5;
        double lo = 1.0 - width;
        acc += oracle::adaptive(inner, 0.0, lo, 1e-13, 50);
        while (lo < 1.0 - 1e-300) {
          const double hi2 = lo + 0.5 * (1.0 - lo);
          acc += oracle::adaptive(inner, lo, hi2, 1e-14, 30);
          lo = hi2;
        }
        return -normalization_constant(1, s) * dirichlet_constant(s) * acc;
      };
      auto moment = [&](bool far) {
        auto f = [&](double x) {
          const double phi = far ? (x - 1.0) / h : 1.0 - (x - 1.0) / h;
          return g_raw(x) * phi;
        };
        double width = h;
        for (int k = 0; k < 40; ++k) width *= 0.5;
        double acc = 0, lo = 1.0, hi = 1.0 + width;
        while (true) {
          acc += oracle::adaptive(f, lo, hi, 1e-12, 26);
          if (hi >= 1.0 + h) break;
          lo = hi;
          hi = std::min(1.0 + h, 1.0 + 2.0 * (hi - 1.0));
        }
        return acc;
      };
      const double oh = moment(false), of = moment(true);
      worst = std::max({worst, std::fabs(fm.m_hat - oh) / std::fabs(oh),
                        std::fabs(fm.m_far - of) / std::fabs(of)});
    }
    ok = ok && worst <= 1e-6;
    detail += "flux moments (8 samples): worst rel dev " + fmt(worst) + "; ";
  }

  { // 1D pair integrals per contact class
    double worst_id = 0, worst_adj = 0, worst_dis = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const double s = 0.1 + 0.8 * uni(rng);
      const double la = 0.02 + 0.3 * uni(rng), lb = 0.02 + 0.3 * uni(rng);
      { // identical
        PairTrace1D fi{trial % 2 ? Trace1D::hat_left : Trace1D::hat_right,
                       trial % 2 ? Trace1D::hat_left : Trace1D::hat_right};
        const double v = pair_integral_1d(0.0, la, 0.0, la, s, fi, fi);
        const double o = oracle::pair_1d(0.0, la, 0.0, la, s, fi, fi);
        worst_id = std::max(worst_id, std::fabs(v - o) / std::fabs(o));
      }
      { // adjacent, continuous traces
        PairTrace1D fi{Trace1D::hat_left, Trace1D::hat_right};
        PairTrace1D fj{trial % 2 ? Trace1D::hat_right : Trace1D::hat_left,
                       trial % 2 ? Trace1D::zero : Trace1D::hat_right};
        const double v = pair_integral_1d(0.0, la, -lb, 0.0, s, fi, fj);
        const double o = oracle::pair_1d(0.0, la, -lb, 0.0, s, fi, fj);
        worst_adj = std::max(worst_adj, std::fabs(v - o) / std::max(std::fabs(o), 1e-10));
      }
      { // disjoint
        const double gap = 0.01 + 0.5 * uni(rng);
        PairTrace1D fi{Trace1D::hat_right, Trace1D::zero};
        PairTrace1D fj{Trace1D::zero, Trace1D::hat_left};
        const double v = pair_integral_1d(0.0, la, la + gap, la + gap + lb, s, fi, fj);
        const double o = oracle::pair_1d(0.0, la, la + gap, la + gap + lb, s, fi, fj);
        worst_dis = std::max(worst_dis, std::fabs(v - o) / std::fabs(o));
      }
    }
    ok = ok && worst_id <= 1e-9 && worst_adj <= 1e-6 && worst_dis <= 1e-9;
    detail += "1D pairs (50 each): id " + fmt(worst_id) + ", adj " + fmt(worst_adj) + ", dis " +
              fmt(worst_dis) + "; ";
  }

  { // 2D pair integrals per contact class
    const TriMesh2D mesh = build_disk_mesh_2d(1.0, 2.0, 0.35, 0.0);
    std::vector<std::pair<int, int>> by_class[4];
    for (int a = 0; a < mesh.n_triangles(); ++a)
      for (int b = a; b < mesh.n_triangles(); ++b) {
        int shared = 0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            if (mesh.triangles[a][i] == mesh.triangles[b][j]) ++shared;
        by_class[shared].push_back({a, b});
      }
    const char* names[4] = {"disjoint", "vertex", "edge", "identical"};
    const double tols[4] = {1e-6, 1e-6, 5e-5, 5e-6};
    for (int cls = 3; cls >= 0; --cls) {
      double worst = 0;
      const int n_samples = 50;
      for (int k = 0; k < n_samples; ++k) {
        const auto& pr = by_class[cls][rng() % by_class[cls].size()];
        const double s = 0.15 + 0.7 * uni(rng);
        const PairBlock2D blk = pair_integral_2d(mesh, pr.first, pr.second, s);
        // one random entry of the block per sampled pair
        const int i = static_cast<int>(rng() % blk.n_nodes);
        const int j = static_cast<int>(rng() % blk.n_nodes);
        const double o = oracle::pair_2d(mesh, pr.first, pr.second, blk.nodes[i], blk.nodes[j], s);
        const double scale = std::max(std::fabs(o), 1e-3 * std::fabs(blk.entry[i][i]));
        worst = std::max(worst, std::fabs(blk.entry[i][j] - o) / std::max(scale, 1e-14));
      }
      ok = ok && worst <= tols[cls];
      detail += std::string(names[cls]) + " " + fmt(worst) + "; ";
    }
  }

  report(8, ok, "quadrature oracle suite (50 samples per class)", detail);
}

void criterion_9() {
  bool ok = true;
  std::string detail;
  { // 1D mesh with N <= 200
    const FractionalParams params(1, 0.5, 1.0);
    const Mesh1D mesh = build_mesh_1d(-1.0, 1.0, 1.0, 1.0 / 45.0);
    const DenseMatrix K = assemble_stiffness(mesh, params);
    const double offsym = max_abs_offsym(K) / max_abs(K);
    Vector ones(K.rows, 1.0);
    const Vector K1 = matvec(K, ones);
    double k1 = 0;
    for (double v : K1) k1 = std::max(k1, std::fabs(v));
    const Vector ev = symmetric_eigenvalues(K);
    double lo = 1e300, hi = -1e300;
    for (double v : ev) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    detail += "1D: offsym " + fmt(offsym) + ", |K1| " + fmt(k1 / max_abs(K)) + ", eig [" + fmt(lo) +
              ", " + fmt(hi) + "]; ";
    ok = ok && offsym <= 1e-12 && k1 <= 1e-8 * max_abs(K) && lo >= -1e-8 * hi;
  }
  { // 2D
    const FractionalParams params(2, 0.6, 1.0);
    const TriMesh2D mesh = build_disk_mesh_2d(1.0, 2.0, 0.4, 0.0);
    const DenseMatrix K = assemble_stiffness(mesh, params);
    const double offsym = max_abs_offsym(K) / max_abs(K);
    Vector ones(K.rows, 1.0);
    const Vector K1 = matvec(K, ones);
    double k1 = 0;
    for (double v : K1) k1 = std::max(k1, std::fabs(v));
    const Vector ev = symmetric_eigenvalues(K);
    double lo = 1e300, hi = -1e300;
    for (double v : ev) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    detail += "2D: offsym " + fmt(offsym) + ", |K1| " + fmt(k1 / max_abs(K)) + ", eig [" + fmt(lo) +
              ", " + fmt(hi) + "]";
    ok = ok && offsym <= 1e-12 && k1 <= 1e-8 * max_abs(K) && lo >= -1e-8 * hi;
  }
  report(9, ok, "stiffness matrix invariants (symmetry, kernel, semidefiniteness)", detail);
}

} // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  auto want = [&](int c) {
    return which.empty() || std::find(which.begin(), which.end(), c) != which.end();
  };
  const double t0 = now();
  if (want(1)) criterion_1();
  if (want(2)) criterion_2();
  if (want(9)) criterion_9();
  if (want(8)) criterion_8();
  if (want(7)) criterion_7();
  if (want(6)) criterion_6();
  if (want(5)) criterion_5();
  if (want(4)) criterion_4();
  if (want(3)) criterion_3();
  std::printf("acceptance total: %s in %.1fs\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              now() - t0);
  return g_failures == 0 ? 0 : 1;
}
