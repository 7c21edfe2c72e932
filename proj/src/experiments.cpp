#include "fracfem/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

namespace fracfem {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
}

void write_summary(const std::string& dir, const std::string& name, const Summary& summary) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : summary) j[k] = v;
  std::ofstream out(dir + "/" + name);
  out << j.dump(2) << "\n";
}

double exact_w(double x, double s) {
  const double r = 1.0 - x * x;
  return r <= 0.0 ? 0.0 : dirichlet_constant(s) * std::pow(r, s);
}

} // namespace

void write_csv(const std::string& path, const std::string& config_line,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& footer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# " << config_line << "\n";
  for (size_t c = 0; c < columns.size(); ++c) out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) out << fmt(row[c]) << (c + 1 < row.size() ? "," : "\n");
  }
  for (const auto& f : footer) out << f << "\n";
}

FluxSpec parse_flux(const std::string& spec, int dim) {
  if (spec.empty() || spec == "zero") return FluxSpec::zero();
  if (spec == "manufactured") {
    if (dim != 1) throw std::invalid_argument("manufactured flux is 1D only");
    return FluxSpec::manufactured();
  }
  if (spec.rfind("power:", 0) == 0) {
    const size_t c1 = spec.find(':'), c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("flux spec: power:A:p");
    return FluxSpec::power_law(std::stod(spec.substr(c1 + 1, c2 - c1 - 1)),
                               std::stod(spec.substr(c2 + 1)));
  }
  throw std::invalid_argument("unknown flux spec '" + spec + "'");
}

SourceSpec parse_source(const std::string& spec) {
  if (spec.empty() || spec == "zero") return SourceSpec::constant(0.0);
  if (spec.rfind("const:", 0) == 0) return SourceSpec::constant(std::stod(spec.substr(6)));
  if (spec == "sin-pi")
    return SourceSpec::callable_1d([](double x) { return std::sin(std::numbers::pi * x); });
  throw std::invalid_argument("unknown source spec '" + spec + "'");
}

Summary run_rates_1d(const ExperimentConfig& cfg) {
  Summary summary;
  const double H = cfg.H_values.at(0);
  for (double s : cfg.s_values) {
    const FractionalParams params(1, s, cfg.alpha);
    std::vector<std::vector<double>> rows;
    std::vector<double> hs, el2, ehs, esemi;
    for (double h : cfg.h_values) {
      auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, H, h));
      SourceSpec f = SourceSpec::callable_1d(
          [s, alpha = cfg.alpha](double x) { return 1.0 + alpha * exact_w(x, s); });
      LinearSystem sys =
          assemble_system(mesh, f, FluxSpec::manufactured(), params, {cfg.quad_order, true});
      DiscreteSolution u = solve_stationary(sys);
      auto exact = [s](double x) { return exact_w(x, s); };
      const double l2 = l2_error_omega(u, exact);
      const HsError he = hs_error_omega_1d(u, exact, s);
      hs.push_back(h);
      el2.push_back(l2);
      ehs.push_back(he.full);
      esemi.push_back(he.seminorm);
      rows.push_back({h, l2, he.full, he.seminorm, omega_mean(u), u.tail_value()});
    }
    const RateFit fit_l2 = fit_rate(hs, el2);
    const RateFit fit_hs = fit_rate(hs, ehs);
    const RateFit fit_semi = fit_rate(hs, esemi);
    const std::string tag = "s" + fmt_short(s);
    write_csv(cfg.out_dir + "/rates1d_" + tag + ".csv",
              "rates1d s=" + fmt_short(s) + " H=" + fmt_short(H) + " alpha=" + fmt_short(cfg.alpha),
              {"h", "l2_error", "hs_error", "hs_seminorm", "omega_mean", "tail_value"}, rows,
              {"# fitted_slope_l2," + fmt(fit_l2.slope), "# fitted_slope_hs," + fmt(fit_hs.slope),
               "# fitted_slope_hs_seminorm," + fmt(fit_semi.slope)});
    summary["slope_l2_" + tag] = fit_l2.slope;
    summary["slope_hs_" + tag] = fit_hs.slope;
    summary["slope_hs_seminorm_" + tag] = fit_semi.slope;
  }
  return summary;
}

Summary run_truncation_1d(const ExperimentConfig& cfg) {
  Summary summary;
  const double h = cfg.h_values.at(0);
  struct Case {
    std::string name;
    SourceSpec f;
    FluxSpec g;
  };
  std::vector<Case> cases;
  if (!cfg.flux.empty()) {
    cases.push_back({"custom", cfg.source.empty() ? SourceSpec::constant(1.0) : parse_source(cfg.source),
                     parse_flux(cfg.flux, 1)});
  } else {
    cases.push_back({"g0", parse_source("sin-pi"), FluxSpec::zero()});
    cases.push_back({"g1", SourceSpec::constant(1.0), FluxSpec::power_law(1.0, 1.0)});
    cases.push_back({"g2", SourceSpec::constant(1.0), FluxSpec::power_law(1.0, 0.5)});
    cases.push_back({"g3", SourceSpec::constant(1.0), FluxSpec::power_law(1.0, 0.2)});
  }
  for (double s : cfg.s_values) {
    for (const auto& cs : cases) {
      TruncationProblem prob{cs.f, cs.g, FractionalParams(1, s, cfg.alpha)};
      const TruncationResult res = truncation_study(prob, cfg.H_values, h, {cfg.quad_order, true});
      std::vector<std::vector<double>> rows;
      for (size_t i = 0; i < res.H_values.size(); ++i)
        rows.push_back({res.H_values[i], res.differences[i]});
      const std::string tag = "s" + fmt_short(s) + "_" + cs.name;
      write_csv(cfg.out_dir + "/truncation1d_" + tag + ".csv",
                "truncation1d s=" + fmt_short(s) + " case=" + cs.name + " h=" + fmt_short(h),
                {"H", "l2_difference"}, rows, {"# fitted_exponent_c," + fmt(res.exponent_c)});
      summary["c_" + tag] = res.exponent_c;
    }
  }
  return summary;
}

namespace {

Summary qualitative_2d_impl(const ExperimentConfig& cfg, bool sweep_radii) {
  Summary summary;
  const double h = cfg.h_values.at(0);
  std::vector<double> radii;
  if (sweep_radii) {
    radii = cfg.H_values; // interpreted as outer radii R_Lambda
  } else {
    radii = {cfg.r_omega + cfg.H_values.at(0)};
  }
  for (double s : cfg.s_values) {
    const FractionalParams params(2, s, cfg.alpha);
    std::vector<std::vector<double>> rows;
    for (double R : radii) {
      auto mesh = std::make_shared<TriMesh2D>(build_disk_mesh_2d(cfg.r_omega, R, h, cfg.grading));
      SourceSpec f = cfg.source.empty() ? SourceSpec::constant(2.0) : parse_source(cfg.source);
      FluxSpec g = cfg.flux.empty() ? FluxSpec::power_law(1.0, 1.0) : parse_flux(cfg.flux, 2);
      LinearSystem sys = assemble_system(mesh, f, g, params, {cfg.quad_order, true});
      DiscreteSolution u = solve_stationary(sys);
      const DecayDiagnostics dg = decay_diagnostics(u, g);
      const double mean = omega_mean(u);
      rows.push_back({R, u.tail_value(), dg.divergent ? 0.0 : dg.predicted_limit, mean,
                      static_cast<double>(mesh->n_triangles())});
      const std::string tag = "s" + fmt_short(s) + "_R" + fmt_short(R);
      summary["tail_" + tag] = u.tail_value();
      summary["mean_" + tag] = mean;
      if (!dg.divergent) summary["predicted_" + tag] = dg.predicted_limit;
      if (!sweep_radii) {
        // solution snapshot for plotting
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < mesh->n_nodes(); ++i)
          pts.push_back({mesh->points[i][0], mesh->points[i][1], u.coeff[i]});
        write_csv(cfg.out_dir + "/solution2d_" + tag + ".csv",
                  "qualitative2d s=" + fmt_short(s) + " R=" + fmt_short(R) + " h=" + fmt_short(h) +
                      " grading=" + fmt_short(cfg.grading),
                  {"x", "y", "u"}, pts, {"# tail_value," + fmt(u.tail_value())});
      }
    }
    write_csv(cfg.out_dir + "/asymptotics2d_s" + fmt_short(s) + ".csv",
              "asymptotics2d s=" + fmt_short(s) + " h=" + fmt_short(h) + " grading=" +
                  fmt_short(cfg.grading),
              {"R", "tail_value", "predicted_limit", "omega_mean", "n_triangles"}, rows, {});
  }
  return summary;
}

} // namespace

Summary run_qualitative_2d(const ExperimentConfig& cfg) { return qualitative_2d_impl(cfg, false); }

Summary run_asymptotics_2d(const ExperimentConfig& cfg) { return qualitative_2d_impl(cfg, true); }

Summary run_heat_1d(const ExperimentConfig& cfg) {
  Summary summary;
  const double h = cfg.h_values.at(0);
  const double H = cfg.H_values.at(0);
  for (double s : cfg.s_values) {
    const FractionalParams params(1, s, 1.0 / cfg.dt);
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, H, h));
    HeatConfig hc;
    hc.dt = cfg.dt;
    hc.t_final = cfg.t_final;
    hc.u0 = SourceSpec::callable_1d([](double x) { return std::fabs(x) <= 0.5 ? 1.0 : 0.0; });
    const HeatResult res = solve_heat(mesh, params, hc, {cfg.quad_order, true});

    const double target = 0.5; // mean of the initial condition on Omega
    std::vector<std::vector<double>> rows;
    std::vector<double> ts, errs;
    double max_mass_drift = 0;
    double mass0 = 0;
    for (size_t n = 0; n < res.states.size(); ++n) {
      const DiscreteSolution& u = res.states[n];
      const double mass = omega_mean(u) * 2.0;
      if (n == 0) mass0 = mass;
      max_mass_drift = std::max(max_mass_drift, std::fabs(mass - mass0) / std::fabs(mass0));
      const double err = l2_error_omega(u, [target](double) { return target; });
      rows.push_back({res.times[n], err, mass});
      if (res.times[n] >= 0.1 - 1e-12 && res.times[n] <= 1.0 + 1e-12 && err > 0) {
        ts.push_back(res.times[n]);
        errs.push_back(err);
      }
    }
    // exponential decay: log(err) linear in t
    double slope = 0, r2 = 0;
    {
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
      slope = (n * sxy - sx * sy) / det;
      const double intercept = (sy * sxx - sx * sxy) / det;
      double ss_res = 0, ss_tot = 0;
      const double ybar = sy / n;
      for (int i = 0; i < n; ++i) {
        const double y = std::log(errs[i]);
        ss_res += (y - intercept - slope * ts[i]) * (y - intercept - slope * ts[i]);
        ss_tot += (y - ybar) * (y - ybar);
      }
      r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    const std::string tag = "s" + fmt_short(s);
    write_csv(cfg.out_dir + "/heat1d_" + tag + ".csv",
              "heat1d s=" + fmt_short(s) + " dt=" + fmt_short(cfg.dt) + " h=" + fmt_short(h) +
                  " H=" + fmt_short(H),
              {"t", "l2_distance_to_mean", "omega_integral"}, rows,
              {"# decay_rate," + fmt(slope), "# r_squared," + fmt(r2)});
    summary["decay_rate_" + tag] = slope;
    summary["decay_r2_" + tag] = r2;
    summary["mass_drift_" + tag] = max_mass_drift;
    summary["final_mean_" + tag] = omega_mean(res.states.back());
  }
  return summary;
}

Summary run_interp_test(const ExperimentConfig& cfg) {
  Summary summary;
  const double H = cfg.H_values.at(0);
  const FractionalParams params(1, cfg.s_values.at(0), cfg.alpha);
  auto v = [](double x) { return std::cos(x); };
  std::vector<double> hs, errs;
  std::vector<std::vector<double>> rows;
  for (double h : cfg.h_values) {
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, H, h));
    DiscreteSolution ih = quasi_interpolate(v, mesh, params);
    const double err = l2_error_omega(ih, v);
    hs.push_back(h);
    errs.push_back(err);
    rows.push_back({h, err});
  }
  const RateFit fit = fit_rate(hs, errs);
  write_csv(cfg.out_dir + "/interp_test.csv", "interp-test v=cos H=" + fmt_short(H),
            {"h", "l2_error"}, rows, {"# fitted_slope," + fmt(fit.slope)});
  summary["interp_slope"] = fit.slope;
  return summary;
}

Summary run_single_solve(const ExperimentConfig& cfg) {
  Summary summary;
  const double s = cfg.s_values.at(0);
  const double h = cfg.h_values.at(0);
  const double H = cfg.H_values.at(0);
  const FractionalParams params(1, s, cfg.alpha);
  auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(-1.0, 1.0, H, h));
  const SourceSpec f = cfg.source.empty() ? SourceSpec::constant(cfg.alpha) : parse_source(cfg.source);
  const FluxSpec g = parse_flux(cfg.flux, 1);
  LinearSystem sys = assemble_system(mesh, f, g, params, {cfg.quad_order, true});
  DiscreteSolution u = solve_stationary(sys);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < mesh->n_nodes(); ++i) rows.push_back({mesh->nodes[i], u.coeff[i]});
  write_csv(cfg.out_dir + "/solution.csv",
            "solve s=" + fmt_short(s) + " h=" + fmt_short(h) + " H=" + fmt_short(H) + " alpha=" +
                fmt_short(cfg.alpha) + " f=" + cfg.source + " g=" + cfg.flux,
            {"x", "u"}, rows, {"# tail_value," + fmt(u.tail_value())});
  summary["omega_mean"] = omega_mean(u);
  summary["tail_value"] = u.tail_value();
  return summary;
}

int run_experiment(const ExperimentConfig& cfg) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  ensure_dir(cfg.out_dir);
  try {
    Summary summary;
    if (cfg.experiment == "rates1d") summary = run_rates_1d(cfg);
    else if (cfg.experiment == "truncation1d") summary = run_truncation_1d(cfg);
    else if (cfg.experiment == "qualitative2d") summary = run_qualitative_2d(cfg);
    else if (cfg.experiment == "asymptotics2d") summary = run_asymptotics_2d(cfg);
    else if (cfg.experiment == "heat1d") summary = run_heat_1d(cfg);
    else if (cfg.experiment == "interp-test") summary = run_interp_test(cfg);
    else if (cfg.experiment == "solve") summary = run_single_solve(cfg);
    else {
      std::fprintf(stderr, "unknown experiment '%s'\n", cfg.experiment.c_str());
      return 2;
    }
    write_summary(cfg.out_dir, cfg.experiment == "solve" ? "summary.json"
                                                         : cfg.experiment + "_summary.json",
                  summary);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

} // namespace fracfem
