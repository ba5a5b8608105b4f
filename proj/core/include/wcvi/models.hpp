#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcvi/elbo.hpp"
#include "wcvi/math.hpp"
#include "wcvi/rng.hpp"

// The three benchmark models with their simulators and evaluation metrics.
// Every positive or bounded model parameter is carried on an unconstrained
// scale (log for scales and precisions, atanh for the correlation) with the
// change-of-variables Jacobian folded into the log joint, so the variational
// box support lives on plain R^d.

namespace wcvi {

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;  // row-major
  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const {
    return std::span<const double>(a).subspan(static_cast<std::size_t>(i) * cols, cols);
  }
};

// ---------------------------------------------------------------- logistic

struct LogisticData {
  Matrix x;  // first column ones
  std::vector<double> y;
  std::vector<double> true_beta;  // filled by the simulator
};

// log p(y, beta) = sum_i [y_i eta_i - log(1 + e^{eta_i})] + log N(beta; 0, 100 I)
template <class T>
T logistic_log_joint(const LogisticData& data, std::span<const T> beta) {
  const int n = data.x.rows, p = data.x.cols;
  if (static_cast<int>(beta.size()) != p)
    throw InvalidInputError("logistic_log_joint: dimension mismatch");
  std::vector<double> xty(p, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) xty[j] += data.x(i, j) * data.y[i];
  T ll = affine(std::span<const double>(xty), beta);
  for (int i = 0; i < n; ++i) ll -= log1p_exp(affine(data.x.row(i), beta));
  T quad(0.0);
  for (int j = 0; j < p; ++j) quad += square(beta[j]);
  ll -= quad / T(200.0);
  return ll - T(0.5 * p * std::log(2.0 * M_PI * 100.0));
}

// --------------------------------------------------------------------- ard

// theta = (beta_1..p, log alpha_1..p, log sigma2); d = 2p + 1.
struct ArdData {
  Matrix x;
  std::vector<double> y;
  std::vector<double> true_beta;
  std::vector<int> true_nonzero;  // 1 where the true coefficient is nonzero
  double sparsity = 0.0;
};

inline constexpr double kArdGammaShape = 0.001;   // shape-rate Gamma on alpha_j
inline constexpr double kArdGammaRate = 0.001;
inline constexpr double kArdInvGammaShape = 0.01; // on sigma2
inline constexpr double kArdInvGammaRate = 0.01;

template <class T>
T ard_log_joint(const ArdData& data, std::span<const T> theta) {
  using std::exp;
  using std::lgamma;
  const int n = data.x.rows, p = data.x.cols;
  if (static_cast<int>(theta.size()) != 2 * p + 1)
    throw InvalidInputError("ard_log_joint: dimension mismatch");
  auto beta = theta.first(p);
  auto la = theta.subspan(p, p);
  const T& ls2 = theta[2 * p];
  T inv_s2 = exp(-ls2);
  T ssq(0.0);
  for (int i = 0; i < n; ++i) ssq += square(T(data.y[i]) - affine(data.x.row(i), beta));
  T ll = T(-0.5 * n) * (T(std::log(2.0 * M_PI)) + ls2) - T(0.5) * ssq * inv_s2;
  // beta_j ~ N(0, sigma2 / alpha_j)
  for (int j = 0; j < p; ++j) {
    ll += T(-0.5) * (T(std::log(2.0 * M_PI)) + ls2 - la[j]);
    ll -= T(0.5) * square(beta[j]) * exp(la[j]) * inv_s2;
  }
  // Gamma(shape, rate) on alpha_j, plus the log-transform Jacobian
  const double ga = kArdGammaShape, gb = kArdGammaRate;
  for (int j = 0; j < p; ++j)
    ll += T(ga * std::log(gb) - lgamma(ga)) + T(ga - 1.0) * la[j] - T(gb) * exp(la[j]) + la[j];
  // Inv-Gamma on sigma2, plus its Jacobian
  const double ia = kArdInvGammaShape, ib = kArdInvGammaRate;
  ll += T(ia * std::log(ib) - lgamma(ia)) - T(ia + 1.0) * ls2 - T(ib) * exp(-ls2) + ls2;
  return ll;
}

// -------------------------------------------------------------------- hier

// theta = (beta_0, beta_1, (b1, b2) per individual, log sigma, log sigma1,
//          log sigma2, atanh rho); d = 2 + 2 n_ind + 4.
struct HierData {
  int n_ind = 0, n_rep = 0;
  std::vector<int> ind;  // individual index per observation, 0-based
  Matrix x;              // columns (1, x)
  Matrix z;              // columns (1, z): random intercept and slope
  std::vector<double> y;
  std::vector<double> true_beta;  // (-2.0, 1.5)
  std::vector<double> true_b;     // 2 per individual
  double true_sigma = 0.0, true_sigma1 = 0.0, true_sigma2 = 0.0, true_rho = 0.0;
};

inline constexpr double kHierGammaShape = 0.01;  // shape-rate Gamma on each sd
inline constexpr double kHierGammaRate = 0.01;

inline int hier_dim(int n_ind) { return 2 + 2 * n_ind + 4; }

template <class T>
T hier_log_joint(const HierData& data, std::span<const T> theta) {
  using std::exp;
  using std::log;
  using std::tanh;
  const int n = static_cast<int>(data.y.size());
  const int ni = data.n_ind;
  if (static_cast<int>(theta.size()) != hier_dim(ni))
    throw InvalidInputError("hier_log_joint: dimension mismatch");
  auto beta = theta.first(2);
  auto b = theta.subspan(2, 2 * ni);
  const T& ls = theta[2 + 2 * ni];
  const T& ls1 = theta[3 + 2 * ni];
  const T& ls2 = theta[4 + 2 * ni];
  const T& zr = theta[5 + 2 * ni];
  T inv_s2 = exp(T(-2.0) * ls);
  T ssq(0.0);
  for (int i = 0; i < n; ++i) {
    const int g = data.ind[i];
    const std::array<double, 4> w = {data.x(i, 0), data.x(i, 1), data.z(i, 0), data.z(i, 1)};
    const std::array<T, 4> v = {beta[0], beta[1], b[2 * g], b[2 * g + 1]};
    ssq += square(T(data.y[i]) - affine(std::span<const double>(w), std::span<const T>(v)));
  }
  T ll = T(-0.5 * n) * T(std::log(2.0 * M_PI)) - T(static_cast<double>(n)) * ls -
         T(0.5) * ssq * inv_s2;
  // bivariate normal prior on each (b1, b2) under Sigma = D R D
  T rho = tanh(zr);
  T om = T(1.0) - square(rho);  // 1 - rho^2
  T log_om = log(om);
  T inv_om = T(1.0) / om;
  T inv_s1e = exp(-ls1), inv_s2e = exp(-ls2);
  for (int g = 0; g < ni; ++g) {
    T u = b[2 * g] * inv_s1e;
    T v = b[2 * g + 1] * inv_s2e;
    T quad = (square(u) - T(2.0) * rho * u * v + square(v)) * inv_om;
    ll += T(-std::log(2.0 * M_PI)) - ls1 - ls2 - T(0.5) * log_om - T(0.5) * quad;
  }
  // Gamma priors on the three sds, each with its log Jacobian
  const double ga = kHierGammaShape, gb = kHierGammaRate;
  for (const T* lsd : {&ls, &ls1, &ls2})
    ll += T(ga * std::log(gb) - std::lgamma(ga)) + T(ga) * (*lsd) - T(gb) * exp(*lsd);
  // uniform rho on (-1, 1) with the tanh Jacobian
  ll += T(-std::log(2.0)) + log_om;
  return ll;
}

ModelSpec make_logistic_model(LogisticData data);
ModelSpec make_ard_model(ArdData data);
ModelSpec make_hier_model(HierData data);

LogisticData simulate_logistic(int p, int n, std::uint64_t seed);
ArdData simulate_ard(int p, int n, double sparsity, std::uint64_t seed);
HierData simulate_hier(int n_ind, int n_rep, double rho, std::uint64_t seed,
                       double sigma2 = 0.25);

// Data file round trip: one CSV row per observation, 17 significant digits.
void write_logistic_data(const std::string& path, const LogisticData& data);
LogisticData read_logistic_data(const std::string& path);
void write_ard_data(const std::string& path, const ArdData& data);
ArdData read_ard_data(const std::string& path);
void write_hier_data(const std::string& path, const HierData& data);
HierData read_hier_data(const std::string& path);

// ----------------------------------------------------------------- metrics

// Per-coefficient mean absolute error over replications.
std::vector<double> coef_mae(const std::vector<std::vector<double>>& estimates,
                             std::span<const double> truths);

// Plug-in predictive MAE: y_hat = X beta_hat.
double predictive_mae(std::span<const double> beta_hat, const Matrix& x_test,
                      std::span<const double> y_test);

// Indices with alpha strictly above the median (the printed selection rule).
// Large alpha means shrunk to zero, so the relevant set is the complement.
std::vector<int> select_variables(std::span<const double> alpha_hat);

struct ConfusionCounts {
  int tp = 0, fp = 0, fn = 0, tn = 0;
};
// `selected` holds the predicted-positive indices; positives are truly
// nonzero coefficients per the 0/1 pattern.
ConfusionCounts confusion_counts(const std::vector<int>& selected,
                                 const std::vector<int>& truly_nonzero);

// --------------------------------------------------------------- reporting

// Named posterior quantities derived from the unconstrained vector, used by
// the benchmark tables: plain coordinates, exp/tanh back-transforms, and the
// covariance sigma12 = tanh(t) exp(a) exp(b).
enum class TransformKind { Identity, Exp, Tanh, SigmaProduct };

struct ReportItem {
  std::string label;
  TransformKind kind = TransformKind::Identity;
  int i = 0, j = 0, k = 0;
};

double apply_transform(const ReportItem& item, std::span<const double> theta);

std::vector<ReportItem> logistic_report_items(int p);
std::vector<ReportItem> ard_report_items(int p);
std::vector<ReportItem> hier_report_items(int n_ind);

}  // namespace wcvi
