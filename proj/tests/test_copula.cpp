#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wcvi/autodiff.hpp"
#include "wcvi/copula.hpp"
#include "wcvi/rng.hpp"

using namespace wcvi;

namespace {

// Exact correlation point for oracle comparisons.
CorrelationMatrix rho_matrix(double rho) {
  std::vector<double> p = {1.0, rho, rho, 1.0};
  return correlation_from_matrix(std::span<const double>(p), 2);
}

// Closed form for d = 2: -1/2 log(1-rho^2) - [rho^2(z1^2+z2^2) - 2 rho z1 z2] / (2(1-rho^2))
double logpdf_2d(double u1, double u2, double rho) {
  double z1 = normal_quantile(u1), z2 = normal_quantile(u2);
  double om = 1.0 - rho * rho;
  return -0.5 * std::log(om) - (rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) / (2.0 * om);
}

}  // namespace

TEST_CASE("triangular parameterization lands on the intended correlation") {
  // raw = (log d0, log d1, l10); rows normalize to unit length
  std::vector<double> raw = {0.3, 0.0, 1.0};
  CorrelationMatrix c = build_correlation(std::span<const double>(raw), 2);
  CHECK(c.chol[0] == 1.0);  // exactly, by x/x
  CHECK(c.chol[2] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.chol[3] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.p[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.p[3] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(logdet_from_cholesky(std::span<const double>(c.chol), 2) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("the first log-diagonal is a flat direction, bitwise") {
  std::vector<double> base = {0.1, -0.4, 0.8};
  CorrelationMatrix ref = build_correlation(std::span<const double>(base), 2);
  for (double shift : {-3.3, 2.1, 7.9}) {
    std::vector<double> raw = base;
    raw[0] = shift;
    CorrelationMatrix c = build_correlation(std::span<const double>(raw), 2);
    for (int k = 0; k < 4; ++k) {
      CHECK(c.chol[k] == ref.chol[k]);
      CHECK(c.p[k] == ref.p[k]);
    }
  }
}

TEST_CASE("random parameterizations give valid correlations") {
  Rng rng(derive_seed(17, "test-copula", 0));
  for (int rep = 0; rep < 100; ++rep) {
    int d = 2 + static_cast<int>(rng.next_u64() % 3);  // 2..4
    std::vector<double> raw(d * (d + 1) / 2);
    for (auto& v : raw) v = rng.uniform(-1.0, 1.0);
    CorrelationMatrix c = build_correlation(std::span<const double>(raw), d);
    for (int i = 0; i < d; ++i) {
      CHECK(c.p[i * d + i] == doctest::Approx(1.0).epsilon(1e-13));
      for (int j = 0; j < i; ++j) {
        CHECK(std::abs(c.p[i * d + j]) <= 1.0 + 1e-13);
        CHECK(c.p[i * d + j] == c.p[j * d + i]);
      }
      // normalized rows are the Cholesky factor: diagonal stays positive
      CHECK(c.chol[i * d + i] > 0.0);
    }
  }
}

TEST_CASE("identity copula density is identically zero") {
  std::vector<double> raw = {0.7, -0.2, 0.0};  // zero off-diagonal, any diagonals
  CorrelationMatrix c = build_correlation(std::span<const double>(raw), 2);
  Rng rng(derive_seed(17, "test-copula", 1));
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> u = {rng.uniform(), rng.uniform()};
    // row normalization leaves ulp-level residue on the diagonal, nothing more
    CHECK(std::abs(gaussian_copula_logpdf(std::span<const double>(u), c)) < 1e-13);
  }
}

TEST_CASE("log density matches the bivariate closed form") {
  Rng rng(derive_seed(17, "test-copula", 2));
  for (double rho : {-0.7, 0.3, 0.9}) {
    CorrelationMatrix c = rho_matrix(rho);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> u = {rng.uniform(), rng.uniform()};
      double got = gaussian_copula_logpdf(std::span<const double>(u), c);
      CHECK(got == doctest::Approx(logpdf_2d(u[0], u[1], rho)).epsilon(1e-10));
    }
  }
}

TEST_CASE("samples carry the intended rank correlation") {
  const double rho = 0.7;
  CorrelationMatrix c = rho_matrix(rho);
  Rng rng(derive_seed(17, "test-copula", 3));
  const int n = 100000;
  std::vector<double> z(2 * n);
  for (auto& v : z) v = rng.normal();
  std::vector<double> u = sample_gaussian_copula(c, std::span<const double>(z), n);
  std::vector<double> u1(n), u2(n), z1(n), z2(n);
  for (int s = 0; s < n; ++s) {
    u1[s] = u[2 * s];
    u2[s] = u[2 * s + 1];
    z1[s] = normal_quantile(u1[s]);
    z2[s] = normal_quantile(u2[s]);
  }
  double spearman_expected = 6.0 / M_PI * std::asin(rho / 2.0);  // 0.6829
  CHECK(std::abs(oracle::spearman(u1, u2) - spearman_expected) < 0.02);
  CHECK(std::abs(oracle::pearson(z1, z2) - rho) < 0.02);
}

TEST_CASE("monte carlo mean of the log density hits the entropy identity") {
  // E[log c(U)] = -1/2 log|P| because tr((P^inv - I) P) = 0
  const double rho = 0.6;
  CorrelationMatrix c = rho_matrix(rho);
  Rng rng(derive_seed(17, "test-copula", 4));
  const int n = 20000;
  std::vector<double> z(2 * n);
  for (auto& v : z) v = rng.normal();
  std::vector<double> u = sample_gaussian_copula(c, std::span<const double>(z), n);
  std::vector<double> vals(n);
  for (int s = 0; s < n; ++s) {
    std::vector<double> row = {u[2 * s], u[2 * s + 1]};
    vals[s] = gaussian_copula_logpdf(std::span<const double>(row), c);
  }
  double target = -0.5 * std::log(1.0 - rho * rho);
  double se = oracle::sd(vals) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(oracle::mean(vals) - target) < 4.0 * se);
  CHECK(copula_entropy_term(c) == doctest::Approx(target).epsilon(1e-12));
}

TEST_CASE("copula density integrates to one") {
  const double rho = 0.7;
  CorrelationMatrix c = rho_matrix(rho);
  const int n = 256;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<double> u = {(i + 0.5) / n, (j + 0.5) / n};
      acc += std::exp(gaussian_copula_logpdf(std::span<const double>(u), c));
    }
  acc /= static_cast<double>(n) * n;
  CHECK(acc == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("copula gradients agree with differences") {
  std::vector<double> raw = {0.2, -0.1, 0.4, 0.5, -0.3, 0.25};  // d = 3
  auto fn = [](std::span<const ad::Var> v) {
    auto corr = build_correlation(v, 3);
    std::vector<ad::Var> u = {ad::Var(0.31), ad::Var(0.74), ad::Var(0.52)};
    return gaussian_copula_logpdf(std::span<const ad::Var>(u), corr);
  };
  CHECK(ad::gradient_check(fn, std::span<const double>(raw)) < 1e-6);
}

TEST_CASE("copula error paths") {
  CorrelationMatrix c = rho_matrix(0.5);
  std::vector<double> bad = {0.0, 0.5};
  CHECK_THROWS_AS(gaussian_copula_logpdf(std::span<const double>(bad), c), DomainError);
  bad = {0.5, 1.0};
  CHECK_THROWS_AS(gaussian_copula_logpdf(std::span<const double>(bad), c), DomainError);

  // inside the open interval the u components clamp instead of throwing
  std::vector<double> tiny = {1e-12, 0.5};
  std::vector<double> edge = {kCopulaUClamp, 0.5};
  CHECK(gaussian_copula_logpdf(std::span<const double>(tiny), c) ==
        gaussian_copula_logpdf(std::span<const double>(edge), c));

  std::vector<double> raw = {0.1, 0.2};  // wrong count for any d
  CHECK_THROWS_AS(build_correlation(std::span<const double>(raw), 2), InvalidInputError);

  CopulaParams indep;
  CHECK_THROWS_AS(build_correlation(indep, 2), NotApplicableError);
  CHECK(copula_entropy_term(indep, 2) == 0.0);
}
