#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcvi/elbo.hpp"

// Experiment configuration and the four runner commands behind the CLI.
// Configs are JSON; unknown keys anywhere are an error so typos in scenario
// grids fail loudly instead of silently using defaults.

namespace wcvi {

struct ScenarioConfig {
  int n = 1000;                 // observations (logistic, ard)
  int p = 5;                    // regressors (logistic, ard)
  double sparsity = 0.5;        // ard: fraction of true coefficients zeroed
  double test_fraction = 0.1;   // ard: trailing rows held out for prediction
  int n_ind = 30;               // hier: individuals
  int n_rep = 10;               // hier: observations per individual
  double rho = 0.7;             // hier: random-effect correlation
  double sigma2 = 0.25;         // hier: sd of the second random effect
  bool operator==(const ScenarioConfig&) const = default;
};

struct McmcConfig {
  int iterations = 200000;
  int burn_in = 50000;
  bool operator==(const McmcConfig&) const = default;
};

struct ExperimentConfig {
  std::string model = "logistic";  // logistic | ard | hier
  CopulaVariant variant = CopulaVariant::Independence;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int replications = 1;
  ScenarioConfig scenario;
  FitConfig fit;  // fit.seed and fit.variant are derived at run time
  McmcConfig mcmc;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& json_text);
std::string render_config(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

// Unconstrained coordinate names for summary tables.
std::vector<std::string> param_labels(const ExperimentConfig& cfg);

void run_simulate(const ExperimentConfig& cfg, bool quiet);
void run_fit(const ExperimentConfig& cfg, bool quiet);
void run_benchmark(const ExperimentConfig& cfg, bool quiet);
void run_gradcheck(const ExperimentConfig& cfg, bool quiet);

}  // namespace wcvi
