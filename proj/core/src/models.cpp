#include "wcvi/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "wcvi/csv.hpp"

namespace wcvi {

ModelSpec make_logistic_model(LogisticData data) {
  auto ptr = std::make_shared<const LogisticData>(std::move(data));
  const int d = ptr->x.cols;
  return make_model_spec(d, "logistic",
                         [ptr](auto theta) { return logistic_log_joint(*ptr, theta); });
}

ModelSpec make_ard_model(ArdData data) {
  auto ptr = std::make_shared<const ArdData>(std::move(data));
  const int d = 2 * ptr->x.cols + 1;
  return make_model_spec(d, "ard", [ptr](auto theta) { return ard_log_joint(*ptr, theta); });
}

ModelSpec make_hier_model(HierData data) {
  auto ptr = std::make_shared<const HierData>(std::move(data));
  const int d = hier_dim(ptr->n_ind);
  return make_model_spec(d, "hier", [ptr](auto theta) { return hier_log_joint(*ptr, theta); });
}

LogisticData simulate_logistic(int p, int n, std::uint64_t seed) {
  if (p < 1 || n < p) throw InvalidInputError("simulate_logistic: need p >= 1 and n >= p");
  Rng rng(derive_seed(seed, "simulate-logistic", 0));
  LogisticData data;
  data.true_beta.resize(p);
  for (int j = 0; j < p; ++j) data.true_beta[j] = rng.normal();
  data.x = Matrix(n, p);
  for (int i = 0; i < n; ++i) {
    data.x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) data.x(i, j) = rng.normal();
  }
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    double eta = 0.0;
    for (int j = 0; j < p; ++j) eta += data.x(i, j) * data.true_beta[j];
    data.y[i] = rng.uniform() < sigmoid(eta) ? 1.0 : 0.0;
  }
  return data;
}

ArdData simulate_ard(int p, int n, double sparsity, std::uint64_t seed) {
  if (p < 1 || n < 1 || !(sparsity >= 0.0 && sparsity < 1.0))
    throw InvalidInputError("simulate_ard: need p, n >= 1 and sparsity in [0, 1)");
  Rng rng(derive_seed(seed, "simulate-ard", 0));
  ArdData data;
  data.sparsity = sparsity;
  data.true_beta.resize(p);
  for (int j = 0; j < p; ++j) data.true_beta[j] = rng.normal();
  // zero ceil(r p) coefficients at positions drawn without replacement
  const int n_zero = static_cast<int>(std::ceil(sparsity * p));
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < n_zero; ++j) {
    int k = j + static_cast<int>(rng.uniform() * (p - j));
    if (k >= p) k = p - 1;
    std::swap(idx[j], idx[k]);
    data.true_beta[idx[j]] = 0.0;
  }
  data.true_nonzero.assign(p, 1);
  for (int j = 0; j < n_zero; ++j) data.true_nonzero[idx[j]] = 0;
  data.x = Matrix(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) data.x(i, j) = rng.normal();
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    double eta = 0.0;
    for (int j = 0; j < p; ++j) eta += data.x(i, j) * data.true_beta[j];
    data.y[i] = eta + rng.normal();
  }
  return data;
}

HierData simulate_hier(int n_ind, int n_rep, double rho, std::uint64_t seed, double sigma2) {
  if (n_ind < 1 || n_rep < 1 || !(rho > -1.0 && rho < 1.0) || !(sigma2 > 0.0))
    throw InvalidInputError("simulate_hier: invalid scenario values");
  Rng rng(derive_seed(seed, "simulate-hier", 0));
  HierData data;
  data.n_ind = n_ind;
  data.n_rep = n_rep;
  data.true_beta = {-2.0, 1.5};
  data.true_sigma = 1.0;
  data.true_sigma1 = 1.0;
  data.true_sigma2 = sigma2;
  data.true_rho = rho;
  data.true_b.resize(2 * n_ind);
  const double cross = std::sqrt(1.0 - rho * rho);
  for (int g = 0; g < n_ind; ++g) {
    double e1 = rng.normal(), e2 = rng.normal();
    data.true_b[2 * g] = data.true_sigma1 * e1;
    data.true_b[2 * g + 1] = data.true_sigma2 * (rho * e1 + cross * e2);
  }
  const int n = n_ind * n_rep;
  data.ind.resize(n);
  data.x = Matrix(n, 2);
  data.z = Matrix(n, 2);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const int g = i / n_rep;
    data.ind[i] = g;
    data.x(i, 0) = 1.0;
    data.x(i, 1) = rng.normal();
    data.z(i, 0) = 1.0;
    data.z(i, 1) = rng.normal();
    double mu = data.x(i, 0) * data.true_beta[0] + data.x(i, 1) * data.true_beta[1] +
                data.z(i, 0) * data.true_b[2 * g] + data.z(i, 1) * data.true_b[2 * g + 1];
    data.y[i] = mu + data.true_sigma * rng.normal();
  }
  return data;
}

namespace {

CsvTable design_table(const Matrix& x, const std::vector<double>& y) {
  CsvTable t;
  for (int j = 0; j < x.cols; ++j) t.header.push_back("x" + std::to_string(j));
  t.header.push_back("y");
  t.rows.resize(x.rows);
  for (int i = 0; i < x.rows; ++i) {
    auto& row = t.rows[i];
    row.reserve(x.cols + 1);
    for (int j = 0; j < x.cols; ++j) row.push_back(x(i, j));
    row.push_back(y[i]);
  }
  return t;
}

void split_design(const CsvTable& t, Matrix& x, std::vector<double>& y, const std::string& path) {
  if (t.header.empty() || t.header.back() != "y")
    throw InvalidInputError("expected trailing y column in " + path);
  const int p = static_cast<int>(t.header.size()) - 1;
  const int n = static_cast<int>(t.rows.size());
  if (n == 0) throw InvalidInputError("no observations in " + path);
  x = Matrix(n, p);
  y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = t.rows[i][j];
    y[i] = t.rows[i][p];
  }
}

}  // namespace

void write_logistic_data(const std::string& path, const LogisticData& data) {
  write_csv(path, design_table(data.x, data.y));
}

LogisticData read_logistic_data(const std::string& path) {
  LogisticData data;
  split_design(read_csv(path), data.x, data.y, path);
  for (double v : data.y)
    if (v != 0.0 && v != 1.0) throw InvalidInputError("non-binary outcome in " + path);
  return data;
}

void write_ard_data(const std::string& path, const ArdData& data) {
  write_csv(path, design_table(data.x, data.y));
}

ArdData read_ard_data(const std::string& path) {
  ArdData data;
  split_design(read_csv(path), data.x, data.y, path);
  return data;
}

void write_hier_data(const std::string& path, const HierData& data) {
  CsvTable t;
  t.header = {"ind", "x0", "x1", "z0", "z1", "y"};
  const int n = static_cast<int>(data.y.size());
  t.rows.resize(n);
  for (int i = 0; i < n; ++i)
    t.rows[i] = {static_cast<double>(data.ind[i]), data.x(i, 0), data.x(i, 1),
                 data.z(i, 0),                     data.z(i, 1), data.y[i]};
  write_csv(path, t);
}

HierData read_hier_data(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"ind", "x0", "x1", "z0", "z1", "y"})
    throw InvalidInputError("unexpected columns in " + path);
  const int n = static_cast<int>(t.rows.size());
  if (n == 0) throw InvalidInputError("no observations in " + path);
  HierData data;
  data.ind.resize(n);
  data.x = Matrix(n, 2);
  data.z = Matrix(n, 2);
  data.y.resize(n);
  int max_ind = -1;
  for (int i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    data.ind[i] = static_cast<int>(row[0]);
    if (data.ind[i] < 0 || row[0] != std::floor(row[0]))
      throw InvalidInputError("bad individual index in " + path);
    max_ind = std::max(max_ind, data.ind[i]);
    data.x(i, 0) = row[1];
    data.x(i, 1) = row[2];
    data.z(i, 0) = row[3];
    data.z(i, 1) = row[4];
    data.y[i] = row[5];
  }
  data.n_ind = max_ind + 1;
  data.n_rep = n % data.n_ind == 0 ? n / data.n_ind : 0;
  return data;
}

std::vector<double> coef_mae(const std::vector<std::vector<double>>& estimates,
                             std::span<const double> truths) {
  if (estimates.empty()) throw InvalidInputError("coef_mae: no replications");
  const std::size_t p = truths.size();
  std::vector<double> mae(p, 0.0);
  for (const auto& est : estimates) {
    if (est.size() != p) throw InvalidInputError("coef_mae: estimate length mismatch");
    for (std::size_t j = 0; j < p; ++j) mae[j] += std::abs(est[j] - truths[j]);
  }
  for (auto& v : mae) v /= static_cast<double>(estimates.size());
  return mae;
}

double predictive_mae(std::span<const double> beta_hat, const Matrix& x_test,
                      std::span<const double> y_test) {
  if (static_cast<int>(beta_hat.size()) != x_test.cols ||
      static_cast<int>(y_test.size()) != x_test.rows)
    throw InvalidInputError("predictive_mae: shape mismatch");
  double acc = 0.0;
  for (int i = 0; i < x_test.rows; ++i) {
    double pred = 0.0;
    for (int j = 0; j < x_test.cols; ++j) pred += x_test(i, j) * beta_hat[j];
    acc += std::abs(pred - y_test[i]);
  }
  return acc / x_test.rows;
}

std::vector<int> select_variables(std::span<const double> alpha_hat) {
  const std::size_t p = alpha_hat.size();
  if (p == 0) return {};
  std::vector<double> sorted(alpha_hat.begin(), alpha_hat.end());
  std::sort(sorted.begin(), sorted.end());
  double median = p % 2 == 1 ? sorted[p / 2] : 0.5 * (sorted[p / 2 - 1] + sorted[p / 2]);
  std::vector<int> selected;
  for (std::size_t j = 0; j < p; ++j)
    if (alpha_hat[j] > median) selected.push_back(static_cast<int>(j));
  return selected;
}

ConfusionCounts confusion_counts(const std::vector<int>& selected,
                                 const std::vector<int>& truly_nonzero) {
  const int p = static_cast<int>(truly_nonzero.size());
  std::vector<char> in_set(p, 0);
  for (int k : selected) {
    if (k < 0 || k >= p) throw InvalidInputError("confusion_counts: index out of range");
    in_set[k] = 1;
  }
  ConfusionCounts c;
  for (int j = 0; j < p; ++j) {
    const bool pos = truly_nonzero[j] != 0;
    if (in_set[j])
      pos ? ++c.tp : ++c.fp;
    else
      pos ? ++c.fn : ++c.tn;
  }
  return c;
}

double apply_transform(const ReportItem& item, std::span<const double> theta) {
  switch (item.kind) {
    case TransformKind::Identity:
      return theta[item.i];
    case TransformKind::Exp:
      return std::exp(theta[item.i]);
    case TransformKind::Tanh:
      return std::tanh(theta[item.i]);
    case TransformKind::SigmaProduct:
      return std::tanh(theta[item.i]) * std::exp(theta[item.j]) * std::exp(theta[item.k]);
  }
  throw InvalidInputError("apply_transform: unknown kind");
}

std::vector<ReportItem> logistic_report_items(int p) {
  std::vector<ReportItem> items;
  for (int j = 0; j < p; ++j)
    items.push_back({"beta" + std::to_string(j), TransformKind::Identity, j, 0, 0});
  return items;
}

std::vector<ReportItem> ard_report_items(int p) {
  std::vector<ReportItem> items = logistic_report_items(p);
  items.push_back({"sigma2", TransformKind::Exp, 2 * p, 0, 0});
  return items;
}

std::vector<ReportItem> hier_report_items(int n_ind) {
  const int base = 2 + 2 * n_ind;
  std::vector<ReportItem> items;
  items.push_back({"beta0", TransformKind::Identity, 0, 0, 0});
  items.push_back({"beta1", TransformKind::Identity, 1, 0, 0});
  items.push_back({"sigma", TransformKind::Exp, base, 0, 0});
  items.push_back({"sigma1", TransformKind::Exp, base + 1, 0, 0});
  items.push_back({"sigma2", TransformKind::Exp, base + 2, 0, 0});
  items.push_back({"sigma12", TransformKind::SigmaProduct, base + 3, base + 1, base + 2});
  return items;
}

}  // namespace wcvi
