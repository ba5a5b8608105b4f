#include <bit>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wcvi/rng.hpp"
#include "wcvi/wavelet.hpp"

using namespace wcvi;

TEST_CASE("filter identities") {
  for (WaveletFamily fam : {WaveletFamily::Haar, WaveletFamily::Db2}) {
    FilterPair f = make_filter(fam);
    double sum_h = 0.0, sum_h2 = 0.0, sum_g = 0.0;
    for (double h : f.low) {
      sum_h += h;
      sum_h2 += h * h;
    }
    for (double g : f.high) sum_g += g;
    CHECK(sum_h == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sum_h2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(sum_g) < 1e-12);
    // quadrature mirror: g_k = (-1)^k h_{L-1-k}
    const int L = static_cast<int>(f.low.size());
    for (int k = 0; k < L; ++k) {
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      CHECK(f.high[k] == doctest::Approx(sign * f.low[L - 1 - k]).epsilon(1e-15));
    }
  }
}

TEST_CASE("db2 taps and even-shift orthogonality") {
  FilterPair f = make_filter(WaveletFamily::Db2);
  const double s3 = std::sqrt(3.0), c = 4.0 * std::sqrt(2.0);
  REQUIRE(f.low.size() == 4);
  CHECK(f.low[0] == doctest::Approx((1.0 + s3) / c).epsilon(1e-15));
  CHECK(f.low[1] == doctest::Approx((3.0 + s3) / c).epsilon(1e-15));
  CHECK(f.low[2] == doctest::Approx((3.0 - s3) / c).epsilon(1e-15));
  CHECK(f.low[3] == doctest::Approx((1.0 - s3) / c).epsilon(1e-15));
  CHECK(std::abs(f.low[0] * f.low[2] + f.low[1] * f.low[3]) < 1e-12);
}

TEST_CASE("analysis step matches the dense operator") {
  Rng rng(derive_seed(11, "test-wavelet", 0));
  for (WaveletFamily fam : {WaveletFamily::Haar, WaveletFamily::Db2}) {
    FilterPair f = make_filter(fam);
    for (int n : {8, 16, 64}) {
      std::vector<double> x(n);
      for (auto& v : x) v = rng.normal();
      auto [a, d] = dwt_step(x, f);
      auto [a_ref, d_ref] = oracle::dwt_step_dense(x, f);
      for (int i = 0; i < n / 2; ++i) {
        CHECK(a[i] == doctest::Approx(a_ref[i]).epsilon(1e-12));
        CHECK(d[i] == doctest::Approx(d_ref[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("synthesis step matches the transpose operator") {
  Rng rng(derive_seed(11, "test-wavelet", 1));
  for (WaveletFamily fam : {WaveletFamily::Haar, WaveletFamily::Db2}) {
    FilterPair f = make_filter(fam);
    std::vector<double> a(16), d(16);
    for (auto& v : a) v = rng.normal();
    for (auto& v : d) v = rng.normal();
    std::vector<double> got = idwt_step(std::span<const double>(a), std::span<const double>(d), f);
    std::vector<double> ref = oracle::idwt_step_dense(a, d, f);
    for (int i = 0; i < 32; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("one-hot synthesis places the taps") {
  FilterPair haar = make_filter(WaveletFamily::Haar);
  std::vector<double> e1 = {1.0, 0.0};
  std::vector<double> zero = {0.0, 0.0};
  std::vector<double> out =
      idwt_step(std::span<const double>(e1), std::span<const double>(zero), haar);
  REQUIRE(out.size() == 4);
  CHECK(out[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 0.0);

  // third basis vector of length 32 lands the four Db2 taps at positions 4..7
  FilterPair db2 = make_filter(WaveletFamily::Db2);
  std::vector<double> c(32, 0.0);
  c[2] = 1.0;
  std::vector<double> s = approx_reconstruct(std::span<const double>(c), db2);
  REQUIRE(s.size() == 64);
  int nonzero = 0;
  for (int k = 0; k < 64; ++k)
    if (s[k] != 0.0) ++nonzero;
  CHECK(nonzero == 4);
  for (int t = 0; t < 4; ++t) CHECK(s[4 + t] == doctest::Approx(db2.low[t]).epsilon(1e-15));
}

TEST_CASE("constant signals have zero details") {
  for (WaveletFamily fam : {WaveletFamily::Haar, WaveletFamily::Db2}) {
    FilterPair f = make_filter(fam);
    std::vector<double> x(32, 3.25);
    WaveletCoefficients c = dwt(x, f, 3);
    for (const auto& level : c.details)
      for (double v : level) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("round trip and energy preservation") {
  Rng rng(derive_seed(11, "test-wavelet", 2));
  for (WaveletFamily fam : {WaveletFamily::Haar, WaveletFamily::Db2}) {
    FilterPair f = make_filter(fam);
    for (int n : {8, 32, 64}) {
      const int j_total = std::countr_zero(static_cast<unsigned>(n));
      // `levels` is the approximation level R: the result keeps 2^R coefficients
      for (int levels = 1; levels <= j_total - 1; ++levels) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        WaveletCoefficients c = dwt(x, f, levels);
        CHECK(c.levels == levels);
        CHECK(static_cast<int>(c.approx.size()) == (1 << levels));
        std::vector<double> y = idwt(c, f);
        double recon = 0.0;
        for (int i = 0; i < n; ++i) recon = std::max(recon, std::abs(x[i] - y[i]));
        CHECK(recon < 1e-10);
        double ex = 0.0, ec = 0.0;
        for (double v : x) ex += v * v;
        for (double v : c.approx) ec += v * v;
        for (const auto& level : c.details)
          for (double v : level) ec += v * v;
        CHECK(std::abs(ex - ec) < 1e-10);
      }
    }
  }
}

TEST_CASE("input validation") {
  FilterPair f = make_filter(WaveletFamily::Haar);
  std::vector<double> bad(12, 1.0);  // not a power of two
  CHECK_THROWS_AS(dwt_step(std::span<const double>(bad), f), InvalidInputError);
  std::vector<double> x(8, 1.0);
  CHECK_THROWS_AS(dwt(std::span<const double>(x), f, 0), InvalidInputError);
  CHECK_THROWS_AS(dwt(std::span<const double>(x), f, 3), InvalidInputError);
  std::vector<double> a = {1.0, 2.0}, d = {1.0};
  CHECK_THROWS_AS(idwt_step(std::span<const double>(a), std::span<const double>(d), f),
                  InvalidInputError);
}
