#pragma once

#include <map>
#include <string>

#include "fracfem/analysis.hpp"

namespace fracfem {

/// Parameters of one experiment run; filled by the CLI from flags and/or a
/// key=value config file.
struct ExperimentConfig {
  std::string experiment;           // rates1d | truncation1d | qualitative2d |
                                    // asymptotics2d | heat1d | interp-test | solve
  std::vector<double> s_values{0.5};
  double alpha = 1.0;
  std::vector<double> h_values{0.01};
  std::vector<double> H_values{1.0}; // exterior extent (converted to radii in 2D)
  double r_omega = 1.0;
  double grading = 0.0;
  double dt = 0.01;
  double t_final = 1.0;
  std::string out_dir = ".";
  int quad_order = 0;
  int threads = 0;
  std::string flux = "";  // per-experiment flux selector, e.g. "power:1:2"
  std::string source = ""; // per-experiment source selector, e.g. "const:1"
};

/// Key-value results of a run (written as JSON next to the CSVs).
using Summary = std::map<std::string, double>;

Summary run_rates_1d(const ExperimentConfig& cfg);
Summary run_truncation_1d(const ExperimentConfig& cfg);
Summary run_qualitative_2d(const ExperimentConfig& cfg);
Summary run_asymptotics_2d(const ExperimentConfig& cfg);
Summary run_heat_1d(const ExperimentConfig& cfg);
Summary run_interp_test(const ExperimentConfig& cfg);
Summary run_single_solve(const ExperimentConfig& cfg);

/// Dispatch on cfg.experiment; writes CSVs and summary.json under cfg.out_dir.
/// Returns 0 on success, 1 on numerical failure, 2 on usage errors.
int run_experiment(const ExperimentConfig& cfg);

/// Deterministic CSV writing: header row plus a leading comment line that
/// records the full configuration.
void write_csv(const std::string& path, const std::string& config_line,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& footer = {});

FluxSpec parse_flux(const std::string& spec, int dim);
SourceSpec parse_source(const std::string& spec);

} // namespace fracfem
