#include <CLI11.hpp>

#include "fracfem/experiments.hpp"

using fracfem::ExperimentConfig;

namespace {

void add_common(CLI::App* sub, ExperimentConfig& cfg) {
  sub->set_help_flag("--help", "print this help message and exit");
  sub->add_option("--s", cfg.s_values, "fractional order(s) in (0,1)");
  sub->add_option("--alpha", cfg.alpha, "reaction coefficient (> 0)");
  sub->add_option("--h", cfg.h_values, "mesh size(s)");
  sub->add_option("--H", cfg.H_values, "exterior extent beyond Omega (1D) / list of outer radii (2D sweeps)");
  sub->add_option("--radius", cfg.H_values, "alias of --H for radius lists");
  sub->add_option("--r-omega", cfg.r_omega, "radius of the 2D domain Omega");
  sub->add_option("--grading", cfg.grading, "exterior mesh grading exponent");
  sub->add_option("--dt", cfg.dt, "time step");
  sub->add_option("--t-final", cfg.t_final, "final time");
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--quad-order", cfg.quad_order, "quadrature order override");
  sub->add_option("--threads", cfg.threads, "OpenMP thread count (0 = default)");
  sub->add_option("--flux", cfg.flux, "flux g: zero | manufactured | power:A:p");
  sub->add_option("--source", cfg.source, "source f: const:c | sin-pi");
  sub->set_config("--config");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite element solver for fractional Neumann problems"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  ExperimentConfig cfg;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"solve", "single stationary solve on (-1,1)"},
      {"rates", "1D convergence-rate study against the manufactured solution"},
      {"truncation", "convergence in the computational-domain size H"},
      {"heat", "backward-Euler fractional heat equation"},
      {"asymptotics", "2D value at infinity vs outer radius"},
      {"qualitative", "single 2D solve on the disk"},
      {"interp-test", "quasi-interpolation refinement study"},
  };
  for (const auto& [name, desc] : subs) add_common(app.add_subcommand(name, desc), cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  const std::string sub = app.get_subcommands().at(0)->get_name();
  if (sub == "solve") cfg.experiment = "solve";
  else if (sub == "rates") cfg.experiment = "rates1d";
  else if (sub == "truncation") cfg.experiment = "truncation1d";
  else if (sub == "heat") cfg.experiment = "heat1d";
  else if (sub == "asymptotics") cfg.experiment = "asymptotics2d";
  else if (sub == "qualitative") cfg.experiment = "qualitative2d";
  else cfg.experiment = "interp-test";

  return fracfem::run_experiment(cfg);
}
