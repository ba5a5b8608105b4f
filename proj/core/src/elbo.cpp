#include "wcvi/elbo.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "wcvi/csv.hpp"

namespace wcvi {

void validate_fit_config(const FitConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw InvalidInputError("fit config: learning_rate must be positive");
  if (cfg.mc_samples < 1) throw InvalidInputError("fit config: mc_samples must be >= 1");
  if (cfg.iterations < 1) throw InvalidInputError("fit config: iterations must be >= 1");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw InvalidInputError("fit config: adam betas must lie in [0, 1)");
  if (!(cfg.epsilon > 0.0)) throw InvalidInputError("fit config: epsilon must be positive");
  if (!(cfg.rms_alpha > 0.0 && cfg.rms_alpha < 1.0))
    throw InvalidInputError("fit config: rms_alpha must lie in (0, 1)");
  if (!(cfg.rms_momentum >= 0.0 && cfg.rms_momentum < 1.0))
    throw InvalidInputError("fit config: rms_momentum must lie in [0, 1)");
  if (cfg.init != "laplace-box" && cfg.init != "manual")
    throw InvalidInputError("fit config: init must be 'laplace-box' or 'manual'");
  if (cfg.init == "manual" &&
      (cfg.manual_lower.empty() || cfg.manual_lower.size() != cfg.manual_upper.size()))
    throw InvalidInputError("fit config: manual init needs matching lower/upper boxes");
}

std::vector<double> draw_base_noise(CopulaVariant variant, int n_samples, int d, Rng& rng) {
  std::vector<double> noise(static_cast<std::size_t>(n_samples) * d);
  if (variant == CopulaVariant::Independence)
    for (auto& v : noise) v = rng.uniform();
  else
    for (auto& v : noise) v = rng.normal();
  return noise;
}

namespace {

// Shared value pipeline for the plain and tape paths.  `log_joint` receives
// (theta row, sample index) and returns the model's log joint.
template <class T, class F>
T elbo_core(std::span<const T> flat, int d, CopulaVariant variant, F&& log_joint,
            std::span<const double> noise, int n_samples) {
  BasicFamilyState<T> st = build_family_state(flat, d, variant);
  std::vector<T> theta = sample_joint(st, noise, n_samples);
  T acc(0.0);
  for (int s = 0; s < n_samples; ++s)
    acc += log_joint(std::span<const T>(theta).subspan(static_cast<std::size_t>(s) * d, d), s);
  T value = acc / T(static_cast<double>(n_samples));
  for (int j = 0; j < d; ++j) value -= entropy(st.densities[j]);
  if (variant == CopulaVariant::Gaussian) value -= copula_entropy_term(st.corr);
  return value;
}

std::string format_theta(std::span<const double> theta) {
  std::ostringstream os;
  os << "theta = (";
  for (std::size_t j = 0; j < theta.size(); ++j) os << (j ? ", " : "") << format_g17(theta[j]);
  os << ")";
  return os.str();
}

void check_elbo_args(const ModelSpec& model, int d, std::span<const double> noise,
                     int n_samples) {
  if (model.dim != d) throw InvalidInputError("elbo: model and family dimensions differ");
  if (n_samples < 1) throw InvalidInputError("elbo: need at least one MC sample");
  if (static_cast<int>(noise.size()) != n_samples * d)
    throw InvalidInputError("elbo: base noise size mismatch");
}

ElboEval grad_elbo_flat(ad::Tape& tape, std::span<const double> flat, int d,
                        CopulaVariant variant, const ModelSpec& model,
                        std::span<const double> noise, int n_samples) {
  tape.clear();
  std::vector<ad::Var> vars = tape.inputs(flat);
  ad::Var value =
      elbo_core<ad::Var>(std::span<const ad::Var>(vars), d, variant,
                         [&](std::span<const ad::Var> row, int) { return model.log_joint_var(row); },
                         noise, n_samples);
  ElboEval out;
  out.value = value.value();
  out.grad = tape.grad_inputs(value);
  return out;
}

}  // namespace

double estimate_elbo(const VariationalParams& zeta, const ModelSpec& model,
                     std::span<const double> base_noise, int n_samples) {
  const int d = zeta.dim();
  check_elbo_args(model, d, base_noise, n_samples);
  std::vector<double> flat = pack(zeta);
  return elbo_core<double>(
      std::span<const double>(flat), d, zeta.copula.variant,
      [&](std::span<const double> row, int s) {
        double lj = model.log_joint(row);
        if (!std::isfinite(lj))
          throw NumericalError("estimate_elbo: log joint non-finite at MC sample " +
                                   std::to_string(s),
                               format_theta(row));
        return lj;
      },
      base_noise, n_samples);
}

double elbo_value(std::span<const double> flat, int d, CopulaVariant variant,
                  const ModelSpec& model, std::span<const double> base_noise, int n_samples) {
  check_elbo_args(model, d, base_noise, n_samples);
  return elbo_core<double>(
      flat, d, variant,
      [&](std::span<const double> row, int) { return model.log_joint(row); }, base_noise,
      n_samples);
}

ad::Var elbo_value_var(std::span<const ad::Var> flat, int d, CopulaVariant variant,
                       const ModelSpec& model, std::span<const double> base_noise,
                       int n_samples) {
  check_elbo_args(model, d, base_noise, n_samples);
  return elbo_core<ad::Var>(
      flat, d, variant,
      [&](std::span<const ad::Var> row, int) { return model.log_joint_var(row); }, base_noise,
      n_samples);
}

ElboEval grad_elbo(const VariationalParams& zeta, const ModelSpec& model,
                   std::span<const double> base_noise, int n_samples) {
  const int d = zeta.dim();
  check_elbo_args(model, d, base_noise, n_samples);
  std::vector<double> flat = pack(zeta);
  ad::Tape tape;
  return grad_elbo_flat(tape, flat, d, zeta.copula.variant, model, base_noise, n_samples);
}

void adam_step(std::vector<double>& x, AdamState& st, std::span<const double> g,
               const FitConfig& cfg) {
  const std::size_t n = x.size();
  if (g.size() != n) throw InvalidInputError("adam_step: gradient length mismatch");
  if (st.m.empty()) {
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
  }
  if (st.m.size() != n) throw InvalidInputError("adam_step: state size mismatch");
  st.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, st.t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, st.t);
  for (std::size_t i = 0; i < n; ++i) {
    st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g[i];
    st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    x[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

// v <- alpha v + (1 - alpha) g^2;  buf <- mu buf + g / (sqrt(v) + eps);
// x <- x - lambda buf.
void rmsprop_step(std::vector<double>& x, RmsPropState& st, std::span<const double> g,
                  const FitConfig& cfg) {
  const std::size_t n = x.size();
  if (g.size() != n) throw InvalidInputError("rmsprop_step: gradient length mismatch");
  if (st.v.empty()) {
    st.v.assign(n, 0.0);
    st.buf.assign(n, 0.0);
  }
  if (st.v.size() != n) throw InvalidInputError("rmsprop_step: state size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    st.v[i] = cfg.rms_alpha * st.v[i] + (1.0 - cfg.rms_alpha) * g[i] * g[i];
    st.buf[i] = cfg.rms_momentum * st.buf[i] + g[i] / (std::sqrt(st.v[i]) + cfg.epsilon);
    x[i] -= cfg.learning_rate * st.buf[i];
  }
}

namespace {

struct ModeSearch {
  std::vector<double> theta;
  bool ok = false;
};

// Short Adam ascent from the origin; returns the best point seen.  Quality
// only needs to be box-grade: the support is theta_hat +/- 6 sd.
ModeSearch find_mode(const ModelSpec& model) {
  const int d = model.dim;
  ModeSearch ms;
  ms.theta.assign(d, 0.0);
  std::vector<double> th(d, 0.0);
  ad::Tape tape;
  AdamState state;
  FitConfig step_cfg;
  step_cfg.learning_rate = 0.1;
  double best = -std::numeric_limits<double>::infinity();
  try {
    for (int t = 0; t < 800; ++t) {
      tape.clear();
      std::vector<ad::Var> vars = tape.inputs(th);
      ad::Var v = model.log_joint_var(std::span<const ad::Var>(vars));
      if (!std::isfinite(v.value())) return ms;
      std::vector<double> grad = tape.grad_inputs(v);
      if (v.value() > best) {
        best = v.value();
        ms.theta = th;
      }
      for (double& gi : grad) {
        if (!std::isfinite(gi)) return ms;
        gi = -gi;
      }
      adam_step(th, state, grad, step_cfg);
    }
  } catch (const Error&) {
    return ms;
  }
  for (double v : ms.theta)
    if (!std::isfinite(v) || std::abs(v) > 1e8) return ms;
  ms.ok = std::isfinite(best);
  return ms;
}

}  // namespace

std::vector<double> rough_mode(const ModelSpec& model) { return find_mode(model).theta; }

VariationalParams init_params(const ModelSpec& model, const FitConfig& cfg) {
  const int d = model.dim;
  std::vector<double> lower(d), width(d);
  bool boxed = false;
  if (cfg.init == "manual") {
    if (static_cast<int>(cfg.manual_lower.size()) != d ||
        static_cast<int>(cfg.manual_upper.size()) != d)
      throw InvalidInputError("init_params: manual box must match the model dimension");
    for (int j = 0; j < d; ++j) {
      lower[j] = cfg.manual_lower[j];
      width[j] = cfg.manual_upper[j] - cfg.manual_lower[j];
      if (!(width[j] > 0.0)) throw InvalidInputError("init_params: manual box must have delta2 > delta1");
    }
    boxed = true;
  } else if (cfg.init == "laplace-box") {
    ModeSearch ms = find_mode(model);
    if (ms.ok) {
      // diagonal curvature by central second differences of the log joint
      std::vector<double> th = ms.theta;
      double f0 = model.log_joint(th);
      for (int j = 0; j < d; ++j) {
        const double h = 1e-3 * std::max(1.0, std::abs(th[j]));
        const double saved = th[j];
        th[j] = saved + h;
        double fp = model.log_joint(th);
        th[j] = saved - h;
        double fm = model.log_joint(th);
        th[j] = saved;
        double curv = -(fp - 2.0 * f0 + fm) / (h * h);
        double sd = curv > 0.0 && std::isfinite(curv) ? 1.0 / std::sqrt(curv) : 1.0;
        sd = std::min(std::max(sd, 1e-3), 50.0);
        lower[j] = ms.theta[j] - 6.0 * sd;
        width[j] = 12.0 * sd;
      }
      boxed = true;
    }
    if (!boxed) {
      if (static_cast<int>(cfg.manual_lower.size()) == d &&
          static_cast<int>(cfg.manual_upper.size()) == d) {
        for (int j = 0; j < d; ++j) {
          lower[j] = cfg.manual_lower[j];
          width[j] = cfg.manual_upper[j] - cfg.manual_lower[j];
        }
      } else {
        std::fprintf(stderr, "warning: mode search diverged; using the unit box fallback\n");
        for (int j = 0; j < d; ++j) {
          lower[j] = -6.0;
          width[j] = 12.0;
        }
      }
    }
  } else {
    throw InvalidInputError("init_params: unknown init strategy " + cfg.init);
  }
  VariationalParams zeta;
  zeta.marginals.resize(d);
  for (int j = 0; j < d; ++j) {
    zeta.marginals[j].coeffs.assign(kMarginalCoeffs, 1.0);
    zeta.marginals[j].delta1 = lower[j];
    zeta.marginals[j].log_width = std::log(width[j]);
  }
  zeta.copula.variant = cfg.variant;
  if (cfg.variant == CopulaVariant::Gaussian)
    zeta.copula.raw.assign(copula_param_count(cfg.variant, d), 0.0);
  return zeta;
}

FitResult fit(const ModelSpec& model, const FitConfig& cfg) {
  validate_fit_config(cfg);
  const int d = model.dim;
  const auto t0 = std::chrono::steady_clock::now();
  VariationalParams zeta0 = init_params(model, cfg);
  std::vector<double> flat = pack(zeta0);
  ad::Tape tape;
  AdamState adam;
  RmsPropState rms;
  FitResult res;
  res.elbo_trace.reserve(cfg.iterations);
  std::vector<double> g(flat.size());
  for (int t = 0; t < cfg.iterations; ++t) {
    Rng rng(derive_seed(cfg.seed, "fit-noise", static_cast<std::uint64_t>(t)));
    std::vector<double> noise = draw_base_noise(cfg.variant, cfg.mc_samples, d, rng);
    ElboEval ev;
    try {
      ev = grad_elbo_flat(tape, flat, d, cfg.variant, model, noise, cfg.mc_samples);
    } catch (const Error& e) {
      std::ostringstream diag;
      diag << "trace tail:";
      const std::size_t k = res.elbo_trace.size();
      for (std::size_t i = k > 10 ? k - 10 : 0; i < k; ++i)
        diag << " " << format_g17(res.elbo_trace[i]);
      throw NumericalError("fit: evaluation failed at iteration " + std::to_string(t) + ": " +
                               e.what(),
                           diag.str());
    }
    if (!std::isfinite(ev.value)) {
      std::ostringstream diag;
      diag << "trace tail:";
      const std::size_t k = res.elbo_trace.size();
      for (std::size_t i = k > 10 ? k - 10 : 0; i < k; ++i)
        diag << " " << format_g17(res.elbo_trace[i]);
      throw NumericalError("fit: ELBO non-finite at iteration " + std::to_string(t), diag.str());
    }
    res.elbo_trace.push_back(ev.value);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -ev.grad[i];
    if (cfg.optimizer == Optimizer::Adam)
      adam_step(flat, adam, g, cfg);
    else
      rmsprop_step(flat, rms, g, cfg);
  }
  res.zeta = unpack(flat, d, cfg.variant);
  FamilyState st = build_family_state(std::span<const double>(flat), d, cfg.variant);
  res.summaries.reserve(d);
  for (int j = 0; j < d; ++j) res.summaries.push_back(summarize(st.densities[j]));
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace wcvi
