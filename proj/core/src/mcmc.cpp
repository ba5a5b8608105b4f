#include "wcvi/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "wcvi/csv.hpp"

namespace wcvi {

Chain run_rwm(const ModelSpec& model, int iterations, int burn_in, std::uint64_t seed,
              std::span<const double> start) {
  const int d = model.dim;
  if (!(iterations > burn_in && burn_in >= 0))
    throw InvalidInputError("run_rwm: need iterations > burn_in >= 0");
  if (!start.empty() && static_cast<int>(start.size()) != d)
    throw InvalidInputError("run_rwm: start point has wrong dimension");
  std::vector<double> th(d, 0.0);
  if (!start.empty()) th.assign(start.begin(), start.end());
  double lp = model.log_joint(th);
  if (!std::isfinite(lp))
    throw NumericalError("run_rwm: log joint non-finite at the start point");
  Rng rng(derive_seed(seed, "rwm", 0));

  // Welford accumulators feed the per-dimension proposal shape during burn-in.
  std::vector<double> w_mean(d, 0.0), w_m2(d, 0.0);
  long w_count = 0;
  const double var_floor = 1e-6;
  double log_global = std::log(0.1);

  Chain chain;
  chain.dim = d;
  chain.n_draws = iterations - burn_in;
  chain.draws.resize(static_cast<std::size_t>(chain.n_draws) * d);
  chain.step_scales.assign(d, 0.0);

  std::vector<double> scales(d, 0.0), prop(d, 0.0);
  auto refresh_scales = [&] {
    const double g = std::exp(log_global);
    for (int j = 0; j < d; ++j) {
      double var = w_count >= 10 ? w_m2[j] / static_cast<double>(w_count) : 1.0;
      scales[j] = g * std::sqrt(var + var_floor);
    }
  };
  refresh_scales();

  long accepted_post = 0;
  for (int t = 0; t < iterations; ++t) {
    for (int j = 0; j < d; ++j) prop[j] = th[j] + scales[j] * rng.normal();
    double lp_prop = model.log_joint(prop);
    double alpha = 0.0;
    if (std::isfinite(lp_prop)) alpha = std::min(1.0, std::exp(lp_prop - lp));
    const bool accept = rng.uniform() < alpha;
    if (accept) {
      th = prop;
      lp = lp_prop;
    }
    if (t < burn_in) {
      const double gamma = std::pow(static_cast<double>(t + 1), -0.6);
      log_global += gamma * (alpha - 0.234);
      w_count += 1;
      for (int j = 0; j < d; ++j) {
        const double delta = th[j] - w_mean[j];
        w_mean[j] += delta / static_cast<double>(w_count);
        w_m2[j] += delta * (th[j] - w_mean[j]);
      }
      refresh_scales();  // frozen once t reaches burn_in
    } else {
      if (accept) ++accepted_post;
      std::copy(th.begin(), th.end(),
                chain.draws.begin() + static_cast<std::size_t>(t - burn_in) * d);
    }
  }
  chain.acceptance_rate = static_cast<double>(accepted_post) / chain.n_draws;
  chain.step_scales = scales;
  return chain;
}

namespace {

void fft(std::vector<std::complex<double>>& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (invert ? -1.0 : 1.0);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (invert)
    for (auto& x : a) x /= static_cast<double>(n);
}

// Biased autocovariance c_k = (1/n) sum_{t} (x_t - xbar)(x_{t+k} - xbar).
std::vector<double> autocovariance(std::span<const double> x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<std::complex<double>> buf(m, 0.0);
  for (std::size_t t = 0; t < n; ++t) buf[t] = x[t] - mean;
  fft(buf, false);
  for (auto& v : buf) v = v * std::conj(v);
  fft(buf, true);
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = buf[k].real() / static_cast<double>(n);
  return c;
}

}  // namespace

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return 0.0;
  std::vector<double> c = autocovariance(x);
  if (!(c[0] > 0.0)) return 0.0;
  // Geyer: sum paired autocorrelations while the pairs stay positive.
  double tau = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (c[2 * m] + c[2 * m + 1]) / c[0];
    if (pair <= 0.0) break;
    tau += pair;
  }
  tau = 2.0 * tau - 1.0;
  if (tau < 1.0) tau = 1.0;
  return static_cast<double>(n) / tau;
}

double sample_quantile(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 0) throw InvalidInputError("sample_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInputError("sample_quantile: q outside [0, 1]");
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<ChainSummary> summarize(const Chain& chain) {
  const int d = chain.dim, n = chain.n_draws;
  if (n < 1) throw InvalidInputError("summarize: empty chain");
  std::vector<ChainSummary> out(d);
  std::vector<double> col(n);
  for (int j = 0; j < d; ++j) {
    for (int t = 0; t < n; ++t) col[t] = chain.draws[static_cast<std::size_t>(t) * d + j];
    ChainSummary& s = out[j];
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= n;
    double ssq = 0.0;
    for (double v : col) ssq += (v - mean) * (v - mean);
    s.mean = mean;
    s.sd = n > 1 ? std::sqrt(ssq / (n - 1)) : 0.0;
    s.ess = effective_sample_size(col);
    s.degenerate = !(s.sd > 0.0);
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    s.q025 = sample_quantile(sorted, 0.025);
    s.q500 = sample_quantile(sorted, 0.5);
    s.q975 = sample_quantile(sorted, 0.975);
  }
  return out;
}

void write_chain_csv(const std::string& path, const Chain& chain) {
  CsvTable t;
  for (int j = 0; j < chain.dim; ++j) t.header.push_back("th" + std::to_string(j));
  t.rows.resize(chain.n_draws);
  for (int i = 0; i < chain.n_draws; ++i) {
    auto r = chain.row(i);
    t.rows[i].assign(r.begin(), r.end());
  }
  write_csv(path, t);
}

}  // namespace wcvi
