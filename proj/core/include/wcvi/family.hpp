#pragma once

#include <span>
#include <string>
#include <vector>

#include "wcvi/copula.hpp"
#include "wcvi/marginal.hpp"

// The joint variational family: one grid marginal per model parameter plus a
// copula tying them together.  Optimizers see a flat real vector; the layout
// is d blocks of [32 coefficients, delta1, log_width] followed by the copula
// block (empty for independence, d(d+1)/2 reals for the Gaussian variant).

namespace wcvi {

inline constexpr int kMarginalCoeffs = 32;
inline constexpr int kMarginalBlock = kMarginalCoeffs + 2;

struct VariationalParams {
  std::vector<MarginalParams> marginals;
  CopulaParams copula;
  int dim() const { return static_cast<int>(marginals.size()); }
};

int flat_length(int d, CopulaVariant variant);
std::vector<double> pack(const VariationalParams& zeta);
VariationalParams unpack(std::span<const double> flat, int d, CopulaVariant variant);

std::string variant_name(CopulaVariant v);
CopulaVariant parse_variant(const std::string& name);

// Marginal densities plus the copula correlation, built from one flat vector
// of either plain doubles or tape variables.  This is the object the ELBO
// pipeline evaluates against.
template <class T>
struct BasicFamilyState {
  CopulaVariant variant = CopulaVariant::Independence;
  std::vector<BasicGridDensity<T>> densities;
  BasicCorrelationMatrix<T> corr;  // dim 0 under independence
  int dim() const { return static_cast<int>(densities.size()); }
};
using FamilyState = BasicFamilyState<double>;

template <class T>
BasicFamilyState<T> build_family_state(std::span<const T> flat, int d, CopulaVariant variant) {
  if (static_cast<int>(flat.size()) != flat_length(d, variant))
    throw InvalidInputError("build_family_state: flat vector has wrong length");
  BasicFamilyState<T> st;
  st.variant = variant;
  st.densities.reserve(d);
  for (int j = 0; j < d; ++j) {
    auto block = flat.subspan(static_cast<std::size_t>(j) * kMarginalBlock, kMarginalBlock);
    BasicMarginalParams<T> mp;
    mp.coeffs.assign(block.begin(), block.begin() + kMarginalCoeffs);
    mp.delta1 = block[kMarginalCoeffs];
    mp.log_width = block[kMarginalCoeffs + 1];
    st.densities.push_back(build_density(mp));
  }
  if (variant == CopulaVariant::Gaussian)
    st.corr = build_correlation(flat.subspan(static_cast<std::size_t>(d) * kMarginalBlock), d);
  return st;
}

// Draw S joint parameter vectors from externally supplied base noise, row-major
// S x d: uniforms under independence, standard normals under the Gaussian
// copula.  Holding the noise fixed while the parameters vary is what makes the
// pathwise gradient work.
template <class T>
std::vector<T> sample_joint(const BasicFamilyState<T>& st, std::span<const double> base_noise,
                            int n_samples) {
  const int d = st.dim();
  if (static_cast<int>(base_noise.size()) != n_samples * d)
    throw InvalidInputError("sample_joint: base noise size mismatch");
  std::vector<T> theta(base_noise.size());
  if (st.variant == CopulaVariant::Independence) {
    for (int s = 0; s < n_samples; ++s)
      for (int j = 0; j < d; ++j) {
        std::size_t k = static_cast<std::size_t>(s) * d + j;
        theta[k] = inverse_cdf(st.densities[j], base_noise[k]);
      }
  } else {
    std::vector<T> u = sample_gaussian_copula(st.corr, base_noise, n_samples);
    for (int s = 0; s < n_samples; ++s)
      for (int j = 0; j < d; ++j) {
        std::size_t k = static_cast<std::size_t>(s) * d + j;
        theta[k] = inverse_cdf(st.densities[j], u[k]);
      }
  }
  return theta;
}

// Joint log-density at one point: sum of marginal log-pdfs plus the copula
// log-density at the marginal CDF values.  Out-of-support theta is an error;
// samples are inside the box by construction, so hitting it means a bug.
template <class T, class Q>
T log_q(const BasicFamilyState<T>& st, std::span<const Q> theta) {
  const int d = st.dim();
  if (static_cast<int>(theta.size()) != d)
    throw InvalidInputError("log_q: dimension mismatch");
  T total(0.0);
  for (int j = 0; j < d; ++j) total += log_pdf_at(st.densities[j], theta[j]);
  if (st.variant == CopulaVariant::Gaussian) {
    std::vector<T> u(d);
    for (int j = 0; j < d; ++j) u[j] = T(cdf_at(st.densities[j], theta[j]));
    total += gaussian_copula_logpdf(std::span<const T>(u), st.corr);
  }
  return total;
}

// Line-oriented checkpoint: header (format tag, dim, variant, grid size,
// value count) then one 17-significant-digit decimal per line.
void write_checkpoint(const std::string& path, const VariationalParams& zeta);
VariationalParams read_checkpoint(const std::string& path);

}  // namespace wcvi
