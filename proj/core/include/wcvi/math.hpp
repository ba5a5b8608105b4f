#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wcvi/errors.hpp"

// Plain double scalar kernels.  The same names exist for tape variables in
// wcvi::ad, so code templated on the scalar type picks the right overload by
// argument-dependent lookup.

namespace wcvi {

// Value extraction for code templated on the scalar type; the tape variable
// overload lives next to Var.
inline double scalar_value(double x) { return x; }

inline double square(double x) { return x * x; }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow for large |x|.
inline double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Inverse standard normal cdf.  Rational initial guess refined by two Halley
// steps against erfc; absolute error stays below 1e-9 over (1e-300, 1-1e-16).
double normal_quantile(double u);

inline double sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

inline double dot(std::span<const double> xs, std::span<const double> ys) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += xs[i] * ys[i];
  return s;
}

inline double affine(std::span<const double> w, std::span<const double> xs, double c0 = 0.0) {
  return c0 + dot(w, xs);
}

inline std::vector<double> cumulative_sum(std::span<const double> xs) {
  std::vector<double> out(xs.size());
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (s += xs[i]);
  return out;
}

inline std::vector<double> matvec(std::span<const double> a, int rows, int cols,
                                  std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i)
    out[i] = dot(a.subspan(static_cast<std::size_t>(i) * cols, cols), x);
  return out;
}

// Dense lower Cholesky factor of a symmetric positive definite matrix,
// row-major n*n in and out (upper part of the result is zero).
std::vector<double> cholesky(std::span<const double> sym, int n);

// Solve L w = b for lower-triangular L (row-major n*n).
std::vector<double> triangular_solve(std::span<const double> chol, int n,
                                     std::span<const double> b);

double logdet_from_cholesky(std::span<const double> chol, int n);

// Linear interpolation through one segment; callers select the segment.
inline double interpolate_segment(double x0, double x1, double y0, double y1, double x) {
  if (x1 == x0) throw DomainError("interp", "zero-width segment");
  return y0 + (y1 - y0) * ((x - x0) / (x1 - x0));
}

// Gamma(shape a, rate b) log density at x > 0.
inline double gamma_logpdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x;
}

// Inverse gamma(shape a, scale b) log density at x > 0.
inline double inv_gamma_logpdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

}  // namespace wcvi
