#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "wcvi/errors.hpp"
#include "wcvi/math.hpp"
#include "wcvi/wavelet.hpp"

// Univariate densities parameterized by wavelet approximation coefficients.
//
// A coefficient vector of length m is reconstructed to a signal of length
// n = 2m, squared pointwise, and normalized into a piecewise-constant density
// over n equal cells covering [delta1, delta1 + exp(log_width)].  With
// spacing = width / n, cell i is [delta1 + i*spacing, delta1 + (i+1)*spacing)
// and grid[i] stores its right edge, so grid.back() is the upper support
// edge.  cdf[i] is the mass through grid[i]; the cdf is anchored at
// (delta1, 0) on the left and rescaled so cdf.back() is exactly 1.  The cdf
// interpolated through these anchors is the exact integral of the
// piecewise-constant pdf, hence inverse_cdf draws are exact samples.
//
// Everything is templated on the scalar so the same code runs on doubles and
// on tape variables during optimization.

namespace wcvi {

inline constexpr double kPdfFloor = 1e-12;

template <class T>
struct BasicMarginalParams {
  std::vector<T> coeffs;
  T delta1;
  T log_width;
};
using MarginalParams = BasicMarginalParams<double>;

template <class T>
struct BasicGridDensity {
  std::vector<T> grid;  // right cell edges, ascending
  std::vector<T> pdf;   // density on each cell
  std::vector<T> cdf;   // mass through each right edge, cdf.back() == 1
  T delta1;
  T width;
  T spacing;
  int cells() const { return static_cast<int>(pdf.size()); }
};
using GridDensity = BasicGridDensity<double>;

// The shared synthesis filter behind every marginal: Daubechies with 2
// vanishing moments.
const FilterPair& density_filter();

template <class T>
BasicGridDensity<T> build_density(const BasicMarginalParams<T>& p,
                                  const FilterPair& f = density_filter()) {
  using std::exp;
  const std::size_t m = p.coeffs.size();
  if (m < 8 || !std::has_single_bit(m))
    throw InvalidInputError("build_density: coefficient count must be a power of two >= 8");
  std::vector<T> s = approx_reconstruct(std::span<const T>(p.coeffs), f);
  const int n = static_cast<int>(s.size());
  std::vector<T> raw(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) raw[i] = square(s[i]);
  std::vector<T> csum = cumulative_sum(std::span<const T>(raw));
  T total = csum.back();
  if (!(scalar_value(total) > 0.0))
    throw NumericalError("build_density: degenerate density (all coefficients zero)");

  BasicGridDensity<T> g;
  g.delta1 = p.delta1;
  g.width = exp(p.log_width);
  g.spacing = g.width / static_cast<double>(n);
  T denom = total * g.spacing;
  g.pdf.resize(s.size());
  g.cdf.resize(s.size());
  g.grid.resize(s.size());
  const std::array<T, 2> loc = {p.delta1, g.spacing};
  for (int i = 0; i < n; ++i) {
    g.pdf[i] = raw[i] / denom;
    g.cdf[i] = csum[i] / total;  // exact 1 at the last cell
    const std::array<double, 2> w = {1.0, static_cast<double>(i + 1)};
    g.grid[i] = affine(std::span<const double>(w.data(), 2), std::span<const T>(loc.data(), 2));
  }
  return g;
}

// cdf evaluated by interpolating the stored anchors; clamps to 0 and 1
// outside the support.
template <class T, class Q>
T cdf_at(const BasicGridDensity<T>& g, Q theta) {
  double th = scalar_value(theta);
  if (th < scalar_value(g.delta1)) return T(0.0);
  if (th > scalar_value(g.grid.back())) return T(1.0);
  const auto& grid = g.grid;
  std::size_t hi = std::upper_bound(grid.begin(), grid.end(), th,
                                    [](double q, const T& k) { return q < scalar_value(k); }) -
                   grid.begin();
  if (hi >= grid.size()) hi = grid.size() - 1;
  T x0 = (hi == 0) ? g.delta1 : grid[hi - 1];
  T y0 = (hi == 0) ? T(0.0) : g.cdf[hi - 1];
  return interpolate_segment(x0, grid[hi], y0, g.cdf[hi], theta);
}

// Inverse transform through the piecewise-linear cdf.  The segment is the
// first index whose cdf reaches u, which automatically lands on a segment of
// positive mass (flat zero-mass runs are skipped past).
template <class T, class Q>
T inverse_cdf(const BasicGridDensity<T>& g, Q u) {
  double uv = scalar_value(u);
  if (!(uv > 0.0 && uv < 1.0))
    throw DomainError("inverse_cdf", "u must lie strictly inside (0, 1)");
  const auto& cdf = g.cdf;
  std::size_t i = std::lower_bound(cdf.begin(), cdf.end(), uv,
                                   [](const T& k, double q) { return scalar_value(k) < q; }) -
                  cdf.begin();
  if (i >= cdf.size()) i = cdf.size() - 1;
  T f0 = (i == 0) ? T(0.0) : cdf[i - 1];
  T x0 = (i == 0) ? g.delta1 : g.grid[i - 1];
  return interpolate_segment(f0, cdf[i], x0, g.grid[i], u);
}

// Log of the linearly interpolated pdf, floored at kPdfFloor; constant below
// the first anchor, error outside the support.
template <class T, class Q>
T log_pdf_at(const BasicGridDensity<T>& g, Q theta) {
  using std::log;
  double th = scalar_value(theta);
  if (th < scalar_value(g.delta1) || th > scalar_value(g.grid.back()))
    throw SupportError("log_pdf_at: point outside the support");
  const auto& grid = g.grid;
  std::size_t hi = std::upper_bound(grid.begin(), grid.end(), th,
                                    [](double q, const T& k) { return q < scalar_value(k); }) -
                   grid.begin();
  T v;
  if (hi == 0) {
    v = g.pdf[0];
  } else {
    if (hi >= grid.size()) hi = grid.size() - 1;
    v = interpolate_segment(grid[hi - 1], grid[hi], g.pdf[hi - 1], g.pdf[hi], theta);
  }
  if (scalar_value(v) < kPdfFloor) return T(std::log(kPdfFloor));
  return log(v);
}

// E_q[log q] by the cell rule, skipping cells at or below the floor;
// this is the term entering the evidence bound with a negative sign.
template <class T>
T entropy(const BasicGridDensity<T>& g) {
  using std::log;
  T acc(0.0);
  for (const T& p : g.pdf)
    if (scalar_value(p) > kPdfFloor) acc += p * log(p);
  return acc * g.spacing;
}

struct MarginalSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
};

// Quadrature moments and quantiles of a fitted marginal (cell-center rule).
MarginalSummary summarize(const GridDensity& g);

// E_q[h(theta)] by the cell-center rule.
double grid_expectation(const GridDensity& g, const std::function<double(double)>& h);

MarginalParams uniform_marginal(double delta1, double log_width, int n_coeffs = 32);

}  // namespace wcvi
