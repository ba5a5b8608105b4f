#include "wcvi/marginal.hpp"

#include <cmath>

namespace wcvi {

const FilterPair& density_filter() {
  static const FilterPair f = make_filter(WaveletFamily::Db2);
  return f;
}

double grid_expectation(const GridDensity& g, const std::function<double(double)>& h) {
  double acc = 0.0;
  const int n = g.cells();
  for (int i = 0; i < n; ++i) {
    double center = g.grid[i] - 0.5 * g.spacing;
    acc += h(center) * g.pdf[i] * g.spacing;
  }
  return acc;
}

MarginalSummary summarize(const GridDensity& g) {
  MarginalSummary s;
  s.mean = grid_expectation(g, [](double x) { return x; });
  double m2 = grid_expectation(g, [&](double x) { return square(x - s.mean); });
  s.sd = std::sqrt(std::max(m2, 0.0));
  s.q025 = inverse_cdf(g, 0.025);
  s.q500 = inverse_cdf(g, 0.5);
  s.q975 = inverse_cdf(g, 0.975);
  return s;
}

MarginalParams uniform_marginal(double delta1, double log_width, int n_coeffs) {
  MarginalParams p;
  p.coeffs.assign(static_cast<std::size_t>(n_coeffs), 1.0);
  p.delta1 = delta1;
  p.log_width = log_width;
  return p;
}

}  // namespace wcvi
