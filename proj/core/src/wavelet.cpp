#include "wcvi/wavelet.hpp"

#include <cmath>

namespace wcvi {

FilterPair make_filter(WaveletFamily family) {
  FilterPair f;
  f.family = family;
  const double s2 = std::sqrt(2.0);
  if (family == WaveletFamily::Haar) {
    f.low = {1.0 / s2, 1.0 / s2};
  } else {
    const double s3 = std::sqrt(3.0);
    f.low = {(1.0 + s3) / (4.0 * s2), (3.0 + s3) / (4.0 * s2),
             (3.0 - s3) / (4.0 * s2), (1.0 - s3) / (4.0 * s2)};
  }
  const int L = static_cast<int>(f.low.size());
  f.high.resize(L);
  for (int k = 0; k < L; ++k)
    f.high[k] = (k % 2 == 0 ? 1.0 : -1.0) * f.low[L - 1 - k];
  return f;
}

std::pair<std::vector<double>, std::vector<double>> dwt_step(std::span<const double> x,
                                                             const FilterPair& f) {
  const std::size_t n = x.size();
  if (n < 2 || !std::has_single_bit(n))
    throw InvalidInputError("dwt_step: signal length must be a power of two >= 2");
  const int L = static_cast<int>(f.low.size());
  const std::size_t m = n / 2;
  std::vector<double> approx(m, 0.0), detail(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double a = 0.0, d = 0.0;
    for (int t = 0; t < L; ++t) {
      double v = x[(2 * i + static_cast<std::size_t>(t)) % n];
      a += f.low[t] * v;
      d += f.high[t] * v;
    }
    approx[i] = a;
    detail[i] = d;
  }
  return {std::move(approx), std::move(detail)};
}

WaveletCoefficients dwt(std::span<const double> x, const FilterPair& f, int levels) {
  const std::size_t n = x.size();
  if (n < 4 || !std::has_single_bit(n))
    throw InvalidInputError("dwt: signal length must be a power of two >= 4");
  const int J = std::countr_zero(n);
  if (levels < 1 || levels > J - 1)
    throw InvalidInputError("dwt: levels must lie in [1, J-1]");
  WaveletCoefficients c;
  c.levels = levels;
  c.original_length = n;
  c.details.resize(static_cast<std::size_t>(J - levels));
  std::vector<double> a(x.begin(), x.end());
  for (int j = J - 1; j >= levels; --j) {
    auto [ap, de] = dwt_step(a, f);
    a = std::move(ap);
    c.details[static_cast<std::size_t>(j - levels)] = std::move(de);
  }
  c.approx = std::move(a);
  return c;
}

std::vector<double> idwt(const WaveletCoefficients& c, const FilterPair& f) {
  if (c.original_length < 4 || !std::has_single_bit(c.original_length))
    throw InvalidInputError("idwt: original length must be a power of two >= 4");
  const int J = std::countr_zero(c.original_length);
  if (c.levels < 1 || c.levels > J - 1) throw InvalidInputError("idwt: bad level count");
  if (c.approx.size() != (std::size_t{1} << c.levels))
    throw InvalidInputError("idwt: approximation length does not match level");
  if (c.details.size() != static_cast<std::size_t>(J - c.levels))
    throw InvalidInputError("idwt: wrong number of detail bands");
  std::vector<double> a = c.approx;
  for (std::size_t i = 0; i < c.details.size(); ++i) {
    if (c.details[i].size() != a.size())
      throw InvalidInputError("idwt: detail band length mismatch");
    a = idwt_step<double>(a, c.details[i], f);
  }
  return a;
}

}  // namespace wcvi
