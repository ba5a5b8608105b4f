#include "wcvi/copula.hpp"

#include "wcvi/autodiff.hpp"

namespace wcvi {

CorrelationMatrix build_correlation(const CopulaParams& cp, int d) {
  if (cp.variant != CopulaVariant::Gaussian)
    throw NotApplicableError("independence copula has no correlation matrix");
  return build_correlation(std::span<const double>(cp.raw), d);
}

CorrelationMatrix correlation_from_matrix(std::span<const double> p_full, int d) {
  if (static_cast<int>(p_full.size()) != d * d)
    throw InvalidInputError("correlation_from_matrix: need a full d*d matrix");
  CorrelationMatrix out;
  out.dim = d;
  out.p.assign(p_full.begin(), p_full.end());
  out.chol = cholesky(p_full, d);
  return out;
}

double copula_entropy_term(const CopulaParams& cp, int d) {
  if (cp.variant != CopulaVariant::Gaussian) return 0.0;
  auto corr = build_correlation(std::span<const double>(cp.raw), d);
  return copula_entropy_term<double>(corr);
}

}  // namespace wcvi
