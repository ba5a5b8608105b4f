#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "wcvi/errors.hpp"
#include "wcvi/math.hpp"

// Dependence layer joining the grid marginals.
//
// The Gaussian copula correlation matrix is parameterized by an unconstrained
// lower-triangular factor: d log-diagonal entries followed by the strictly
// lower triangle in row-major order.  With D = diag(L L^T), the correlation
// is P = D^{-1/2} L L^T D^{-1/2}, computed by normalizing each row of L to
// unit length; the normalized factor is then itself the lower Cholesky factor
// of P.  Row 0 normalizes as x/x, which is exactly 1 in floating point, so
// the first log-diagonal (a flat direction of the map) cannot leak rounding
// noise into P: its finite differences vanish identically, matching its zero
// analytic gradient.

namespace wcvi {

enum class CopulaVariant { Independence, Gaussian };

inline constexpr double kCopulaUClamp = 1e-9;

struct CopulaParams {
  CopulaVariant variant = CopulaVariant::Independence;
  std::vector<double> raw;  // empty for independence
};

inline int copula_param_count(CopulaVariant v, int d) {
  return v == CopulaVariant::Gaussian ? d * (d + 1) / 2 : 0;
}

template <class T>
struct BasicCorrelationMatrix {
  int dim = 0;
  std::vector<T> p;     // full d*d matrix, row-major
  std::vector<T> chol;  // lower Cholesky factor of p, row-major
};
using CorrelationMatrix = BasicCorrelationMatrix<double>;

template <class T>
BasicCorrelationMatrix<T> build_correlation(std::span<const T> raw, int d) {
  using std::exp;
  using std::sqrt;
  if (d < 1 || static_cast<int>(raw.size()) != d * (d + 1) / 2)
    throw InvalidInputError("build_correlation: parameter count must be d(d+1)/2");
  BasicCorrelationMatrix<T> out;
  out.dim = d;
  std::vector<T> l(static_cast<std::size_t>(d) * d, T(0.0));
  std::size_t off = static_cast<std::size_t>(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) l[static_cast<std::size_t>(i) * d + j] = raw[off++];
    l[static_cast<std::size_t>(i) * d + i] = exp(raw[static_cast<std::size_t>(i)]);
  }
  out.chol.assign(static_cast<std::size_t>(d) * d, T(0.0));
  for (int i = 0; i < d; ++i) {
    auto* row = &l[static_cast<std::size_t>(i) * d];
    T norm;
    if (i == 0) {
      norm = row[0];  // single positive entry; x/x normalizes to exactly 1
    } else {
      T ssq(0.0);
      for (int j = 0; j <= i; ++j) ssq += square(row[j]);
      norm = sqrt(ssq);
    }
    for (int j = 0; j <= i; ++j)
      out.chol[static_cast<std::size_t>(i) * d + j] = row[j] / norm;
  }
  out.p.assign(static_cast<std::size_t>(d) * d, T(0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      auto ri = std::span<const T>(out.chol).subspan(static_cast<std::size_t>(i) * d, j + 1);
      auto rj = std::span<const T>(out.chol).subspan(static_cast<std::size_t>(j) * d, j + 1);
      T v = dot(ri, rj);
      out.p[static_cast<std::size_t>(i) * d + j] = v;
      out.p[static_cast<std::size_t>(j) * d + i] = v;
    }
  }
  return out;
}

// CopulaParams front end; the independence variant carries no matrix.
CorrelationMatrix build_correlation(const CopulaParams& cp, int d);

// Assemble from an explicit correlation matrix (tests, reference points).
CorrelationMatrix correlation_from_matrix(std::span<const double> p_full, int d);

// Log copula density at u in (0,1)^d.  Components are clamped into
// [kCopulaUClamp, 1 - kCopulaUClamp] before the normal quantile (saturating
// the gradient there); values on the closed boundary are a domain error.
template <class T>
T gaussian_copula_logpdf(std::span<const T> u, const BasicCorrelationMatrix<T>& corr) {
  const int d = corr.dim;
  if (static_cast<int>(u.size()) != d)
    throw InvalidInputError("gaussian_copula_logpdf: dimension mismatch");
  std::vector<T> z(u.size());
  for (int i = 0; i < d; ++i) {
    double uv = scalar_value(u[i]);
    if (!(uv > 0.0 && uv < 1.0))
      throw DomainError("gaussian_copula_logpdf", "u component on the closed boundary");
    T ui = u[i];
    if (uv < kCopulaUClamp) ui = T(kCopulaUClamp);
    if (uv > 1.0 - kCopulaUClamp) ui = T(1.0 - kCopulaUClamp);
    z[i] = normal_quantile(ui);
  }
  std::vector<T> w = triangular_solve(std::span<const T>(corr.chol), d, std::span<const T>(z));
  T quad(0.0);
  for (int i = 0; i < d; ++i) quad += square(w[i]) - square(z[i]);
  T logdet = logdet_from_cholesky(std::span<const T>(corr.chol), d);
  return T(-0.5) * (logdet + quad);
}

// Map S rows of standard normal noise through the copula: u = Phi(chol z).
// Row-major S x d in and out.
template <class T>
std::vector<T> sample_gaussian_copula(const BasicCorrelationMatrix<T>& corr,
                                      std::span<const double> z, int n_samples) {
  const int d = corr.dim;
  if (static_cast<int>(z.size()) != n_samples * d)
    throw InvalidInputError("sample_gaussian_copula: noise size mismatch");
  std::vector<T> u(z.size());
  for (int s = 0; s < n_samples; ++s) {
    auto zrow = z.subspan(static_cast<std::size_t>(s) * d, d);
    for (int i = 0; i < d; ++i) {
      auto crow = std::span<const T>(corr.chol).subspan(static_cast<std::size_t>(i) * d, i + 1);
      T y = affine(zrow.first(i + 1), crow);
      u[static_cast<std::size_t>(s) * d + i] = normal_cdf(y);
    }
  }
  return u;
}

// E_q[log c]: 0 for independence, -1/2 log|P| for the Gaussian copula.
template <class T>
T copula_entropy_term(const BasicCorrelationMatrix<T>& corr) {
  return T(-0.5) * logdet_from_cholesky(std::span<const T>(corr.chol), corr.dim);
}

double copula_entropy_term(const CopulaParams& cp, int d);

}  // namespace wcvi
