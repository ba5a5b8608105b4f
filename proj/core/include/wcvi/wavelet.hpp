#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wcvi/errors.hpp"
#include "wcvi/math.hpp"

// Orthonormal filter-bank transforms on periodic signals of dyadic length.
//
// Analysis:   (H a)_n = sum_k h_{k-2n} a_k,   (G a)_n = sum_k g_{k-2n} a_k
// Synthesis adjoints scatter back onto the doubled grid, indices mod length.
// The high-pass is the quadrature mirror g_k = (-1)^k h_{L-1-k}, so one step
// is orthonormal and idwt_step inverts dwt_step exactly.

namespace wcvi {

enum class WaveletFamily { Haar, Db2 };

struct FilterPair {
  WaveletFamily family;
  std::vector<double> low;
  std::vector<double> high;
};

FilterPair make_filter(WaveletFamily family);

struct WaveletCoefficients {
  std::vector<double> approx;                // c^(R), length 2^R
  std::vector<std::vector<double>> details;  // d^(R) ... d^(J-1), coarsest first
  int levels = 0;                            // R
  std::size_t original_length = 0;           // 2^J
};

// One decimating analysis step: (approx, detail), each half the input length.
std::pair<std::vector<double>, std::vector<double>> dwt_step(std::span<const double> x,
                                                             const FilterPair& f);

// Full decomposition down to approximation level R (1 <= R <= J-1).
WaveletCoefficients dwt(std::span<const double> x, const FilterPair& f, int levels);

std::vector<double> idwt(const WaveletCoefficients& c, const FilterPair& f);

// One synthesis step onto the doubled grid; empty detail is treated as zero.
// Templated on the scalar so the density pipeline can run it on tape
// variables; each output sample is a single affine combination of inputs.
template <class T>
std::vector<T> idwt_step(std::span<const T> approx, std::span<const T> detail,
                         const FilterPair& f) {
  const int m = static_cast<int>(approx.size());
  if (m < 1 || !std::has_single_bit(static_cast<std::size_t>(m)))
    throw InvalidInputError("idwt_step: approximation length must be a power of two");
  if (!detail.empty() && detail.size() != approx.size())
    throw InvalidInputError("idwt_step: approx/detail length mismatch");
  const int L = static_cast<int>(f.low.size());
  const int n_out = 2 * m;
  std::vector<T> out(static_cast<std::size_t>(n_out));
  std::array<double, 8> w{};
  std::array<T, 8> src{};
  for (int k = 0; k < n_out; ++k) {
    int cnt = 0;
    for (int t = k & 1; t < L; t += 2) {
      int n = (k - t) / 2 % m;
      if (n < 0) n += m;
      w[cnt] = f.low[t];
      src[cnt] = approx[n];
      ++cnt;
      if (!detail.empty()) {
        w[cnt] = f.high[t];
        src[cnt] = detail[n];
        ++cnt;
      }
    }
    out[k] = affine(std::span<const double>(w.data(), cnt),
                    std::span<const T>(src.data(), cnt));
  }
  return out;
}

// Length-doubling reconstruction from approximation coefficients alone.
template <class T>
std::vector<T> approx_reconstruct(std::span<const T> coeffs, const FilterPair& f) {
  return idwt_step(coeffs, std::span<const T>{}, f);
}

}  // namespace wcvi
