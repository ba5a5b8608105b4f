#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wcvi/autodiff.hpp"
#include "wcvi/family.hpp"
#include "wcvi/rng.hpp"

// Monte-Carlo ELBO, pathwise gradients, and the stochastic optimization loop.
//
// ELBO(zeta) = (1/S) sum_s log p(y, theta_s) - E[log c] - sum_j E[log q_j],
// with theta_s drawn by inverse-CDF transform of frozen base noise, the
// copula term -1/2 log|P| in closed form, and the marginal terms by rectangle
// quadrature on each density's own grid.  The same noise drives the value and
// the reverse-mode gradient, so the estimator is pathwise.

namespace wcvi {

// A model is its log joint density over an unconstrained parameter vector,
// provided in both plain-double and tape-variable form.  Transform Jacobians
// for positive or bounded parameters are part of the log joint.
struct ModelSpec {
  int dim = 0;
  std::string name;
  std::function<double(std::span<const double>)> log_joint;
  std::function<ad::Var(std::span<const ad::Var>)> log_joint_var;
};

template <class F>
ModelSpec make_model_spec(int dim, std::string name, F f) {
  ModelSpec m;
  m.dim = dim;
  m.name = std::move(name);
  m.log_joint = [f](std::span<const double> th) -> double { return f(th); };
  m.log_joint_var = [f](std::span<const ad::Var> th) -> ad::Var { return f(th); };
  return m;
}

enum class Optimizer { Adam, RmsProp };

struct FitConfig {
  Optimizer optimizer = Optimizer::Adam;
  CopulaVariant variant = CopulaVariant::Independence;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double rms_alpha = 0.5;     // squared-gradient smoothing
  double rms_momentum = 0.9;
  int iterations = 2000;
  int mc_samples = 50;
  std::uint64_t seed = 1;
  std::string init = "laplace-box";  // or "manual"
  std::vector<double> manual_lower;  // per-dimension box for init = "manual"
  std::vector<double> manual_upper;
  bool operator==(const FitConfig&) const = default;
};

void validate_fit_config(const FitConfig& cfg);

struct FitResult {
  VariationalParams zeta;
  std::vector<double> elbo_trace;
  double wall_seconds = 0.0;
  std::vector<MarginalSummary> summaries;  // per model dimension
};

// Base noise for S joint draws, row-major S x d: uniforms under independence,
// standard normals under the Gaussian copula.
std::vector<double> draw_base_noise(CopulaVariant variant, int n_samples, int d, Rng& rng);

double estimate_elbo(const VariationalParams& zeta, const ModelSpec& model,
                     std::span<const double> base_noise, int n_samples);

// Flat-vector entry points, shared by finite-difference oracles and the
// gradient checker.
double elbo_value(std::span<const double> flat, int d, CopulaVariant variant,
                  const ModelSpec& model, std::span<const double> base_noise, int n_samples);
ad::Var elbo_value_var(std::span<const ad::Var> flat, int d, CopulaVariant variant,
                       const ModelSpec& model, std::span<const double> base_noise,
                       int n_samples);

struct ElboEval {
  double value = 0.0;
  std::vector<double> grad;  // with respect to the flat parameter vector
};
ElboEval grad_elbo(const VariationalParams& zeta, const ModelSpec& model,
                   std::span<const double> base_noise, int n_samples);

// Optimizer steps in minimization form: callers hand in g = -grad ELBO.
struct AdamState {
  std::vector<double> m, v;
  int t = 0;
};
void adam_step(std::vector<double>& x, AdamState& st, std::span<const double> g,
               const FitConfig& cfg);

struct RmsPropState {
  std::vector<double> v, buf;
};
void rmsprop_step(std::vector<double>& x, RmsPropState& st, std::span<const double> g,
                  const FitConfig& cfg);

VariationalParams init_params(const ModelSpec& model, const FitConfig& cfg);

// Rough posterior mode from a short gradient ascent; the laplace-box init
// derives its support from this point, and the MCMC oracle starts here.
// Falls back to the best point seen (the origin at worst) on divergence.
std::vector<double> rough_mode(const ModelSpec& model);

FitResult fit(const ModelSpec& model, const FitConfig& cfg);

}  // namespace wcvi
