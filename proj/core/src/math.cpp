#include "wcvi/math.hpp"

#include <cmath>

namespace wcvi {

namespace {

// Rational approximation for the inverse normal cdf (relative error ~1e-9
// before refinement), split into a central and a tail region.
double quantile_guess(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw DomainError("normal_quantile", "argument must lie strictly inside (0, 1)");
  // Work on the lower half; 1-u is exact for u >= 0.5.
  bool flip = u > 0.5;
  double p = flip ? 1.0 - u : u;
  double x = quantile_guess(p);
  for (int it = 0; it < 2; ++it) {
    double e = normal_cdf(x) - p;
    double f = normal_pdf(x);
    if (f <= 0.0) break;
    double r = e / f;
    x -= r / (1.0 + 0.5 * x * r);  // Halley step
  }
  return flip ? -x : x;
}

std::vector<double> cholesky(std::span<const double> sym, int n) {
  if (static_cast<int>(sym.size()) != n * n)
    throw InvalidInputError("cholesky: matrix size mismatch");
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = sym[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        s -= l[static_cast<std::size_t>(i) * n + k] * l[static_cast<std::size_t>(j) * n + k];
      if (j == i) {
        if (!(s > 0.0)) throw DomainError("cholesky", "matrix is not positive definite");
        l[static_cast<std::size_t>(i) * n + i] = std::sqrt(s);
      } else {
        l[static_cast<std::size_t>(i) * n + j] = s / l[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return l;
}

std::vector<double> triangular_solve(std::span<const double> chol, int n,
                                     std::span<const double> b) {
  if (static_cast<int>(chol.size()) != n * n || static_cast<int>(b.size()) != n)
    throw InvalidInputError("triangular_solve: size mismatch");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= chol[static_cast<std::size_t>(i) * n + k] * w[k];
    double piv = chol[static_cast<std::size_t>(i) * n + i];
    if (piv == 0.0) throw DomainError("triangular_solve", "zero pivot");
    w[i] = s / piv;
  }
  return w;
}

double logdet_from_cholesky(std::span<const double> chol, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double piv = chol[static_cast<std::size_t>(i) * n + i];
    if (!(piv > 0.0)) throw DomainError("logdet_from_cholesky", "non-positive diagonal");
    s += std::log(piv);
  }
  return 2.0 * s;
}

}  // namespace wcvi
