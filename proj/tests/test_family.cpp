#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wcvi/family.hpp"
#include "wcvi/rng.hpp"

using namespace wcvi;

namespace {

// Flat vector holding uniform marginals on [lo, lo + width) per dimension.
std::vector<double> uniform_flat(int d, CopulaVariant variant, double lo, double width) {
  std::vector<double> flat(flat_length(d, variant), 0.0);
  for (int j = 0; j < d; ++j) {
    auto block = std::span<double>(flat).subspan(j * kMarginalBlock, kMarginalBlock);
    for (int i = 0; i < kMarginalCoeffs; ++i) block[i] = 1.0;
    block[kMarginalCoeffs] = lo;
    block[kMarginalCoeffs + 1] = std::log(width);
  }
  return flat;
}

std::vector<double> random_flat(int d, CopulaVariant variant, Rng& rng) {
  std::vector<double> flat(flat_length(d, variant));
  for (int j = 0; j < d; ++j) {
    auto block = std::span<double>(flat).subspan(j * kMarginalBlock, kMarginalBlock);
    for (int i = 0; i < kMarginalCoeffs; ++i) block[i] = rng.uniform(0.5, 1.5);
    block[kMarginalCoeffs] = rng.uniform(-2.0, 0.0);
    block[kMarginalCoeffs + 1] = rng.uniform(-0.5, 1.0);
  }
  for (std::size_t i = static_cast<std::size_t>(d) * kMarginalBlock; i < flat.size(); ++i)
    flat[i] = rng.uniform(-0.5, 0.5);
  return flat;
}

}  // namespace

TEST_CASE("flat layout lengths") {
  CHECK(flat_length(5, CopulaVariant::Independence) == 170);
  CHECK(flat_length(2, CopulaVariant::Gaussian) == 71);
  CHECK(flat_length(1, CopulaVariant::Independence) == 34);
}

TEST_CASE("pack and unpack are inverse bijections") {
  Rng rng(derive_seed(19, "test-family", 0));
  for (CopulaVariant variant : {CopulaVariant::Independence, CopulaVariant::Gaussian}) {
    std::vector<double> flat = random_flat(3, variant, rng);
    VariationalParams zeta = unpack(std::span<const double>(flat), 3, variant);
    CHECK(zeta.dim() == 3);
    std::vector<double> back = pack(zeta);
    REQUIRE(back.size() == flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(back[i] == flat[i]);
  }
}

TEST_CASE("variant names round trip") {
  CHECK(parse_variant(variant_name(CopulaVariant::Independence)) == CopulaVariant::Independence);
  CHECK(parse_variant(variant_name(CopulaVariant::Gaussian)) == CopulaVariant::Gaussian);
  CHECK_THROWS_AS(parse_variant("frank"), InvalidInputError);
}

TEST_CASE("independent joint samples are the uniforms themselves") {
  std::vector<double> flat = uniform_flat(2, CopulaVariant::Independence, 0.0, 1.0);
  FamilyState st = build_family_state(std::span<const double>(flat), 2, CopulaVariant::Independence);
  std::vector<double> noise = {0.25, 0.75, 0.5, 0.1, 0.9, 0.33};
  std::vector<double> theta = sample_joint(st, std::span<const double>(noise), 3);
  for (std::size_t k = 0; k < noise.size(); ++k)
    CHECK(theta[k] == doctest::Approx(noise[k]).epsilon(1e-12));
}

TEST_CASE("identity-correlation gaussian copula reduces to independence") {
  std::vector<double> gflat = uniform_flat(2, CopulaVariant::Gaussian, 0.0, 1.0);
  std::vector<double> iflat = uniform_flat(2, CopulaVariant::Independence, 0.0, 1.0);
  FamilyState gs = build_family_state(std::span<const double>(gflat), 2, CopulaVariant::Gaussian);
  FamilyState is = build_family_state(std::span<const double>(iflat), 2, CopulaVariant::Independence);

  Rng rng(derive_seed(19, "test-family", 1));
  const int s = 64;
  std::vector<double> z(2 * s), u(2 * s);
  for (int k = 0; k < 2 * s; ++k) {
    z[k] = rng.normal();
    u[k] = normal_cdf(z[k]);
  }
  std::vector<double> tg = sample_joint(gs, std::span<const double>(z), s);
  std::vector<double> ti = sample_joint(is, std::span<const double>(u), s);
  for (int k = 0; k < 2 * s; ++k) CHECK(tg[k] == doctest::Approx(ti[k]).epsilon(1e-12));

  // and the joint density agrees wherever we ask
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> th = {rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
    double lg = log_q(gs, std::span<const double>(th));
    double li = log_q(is, std::span<const double>(th));
    CHECK(lg == doctest::Approx(li).epsilon(1e-12));
  }
}

TEST_CASE("rank correlation tracks the copula parameter") {
  Rng rng(derive_seed(19, "test-family", 2));
  const int s = 100000;
  std::vector<double> z(2 * s);
  for (auto& v : z) v = rng.normal();
  double prev = -2.0;
  for (double rho : {-0.7, 0.0, 0.7}) {
    std::vector<double> flat = uniform_flat(2, CopulaVariant::Gaussian, 0.0, 1.0);
    // raw block (log d0, log d1, l10): rows normalize, so (rho, sqrt(1-rho^2)) is exact
    flat[2 * kMarginalBlock + 1] = std::log(std::sqrt(1.0 - rho * rho));
    flat[2 * kMarginalBlock + 2] = rho;
    FamilyState st = build_family_state(std::span<const double>(flat), 2, CopulaVariant::Gaussian);
    std::vector<double> theta = sample_joint(st, std::span<const double>(z), s);
    std::vector<double> t1(s), t2(s);
    for (int k = 0; k < s; ++k) {
      t1[k] = theta[2 * k];
      t2[k] = theta[2 * k + 1];
    }
    double rank = oracle::spearman(t1, t2);
    if (rho != 0.0)
      CHECK(std::abs(rank - 6.0 / M_PI * std::asin(rho / 2.0)) < 0.02);
    else
      CHECK(std::abs(rank) < 0.02);
    CHECK(rank > prev);
    prev = rank;
  }
}

TEST_CASE("joint log density on uniform boxes") {
  std::vector<double> one = uniform_flat(2, CopulaVariant::Independence, 0.0, 1.0);
  FamilyState s1 = build_family_state(std::span<const double>(one), 2, CopulaVariant::Independence);
  std::vector<double> th = {0.4, 0.6};
  CHECK(log_q(s1, std::span<const double>(th)) == 0.0);

  std::vector<double> two = uniform_flat(2, CopulaVariant::Independence, 0.0, 2.0);
  FamilyState s2 = build_family_state(std::span<const double>(two), 2, CopulaVariant::Independence);
  th = {1.3, 0.2};
  CHECK(log_q(s2, std::span<const double>(th)) ==
        doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-14));

  CHECK_THROWS_AS(log_q(s1, std::span<const double>(std::vector<double>{1.5, 0.5})),
                  SupportError);
}

TEST_CASE("all joint draws stay inside the box") {
  Rng rng(derive_seed(19, "test-family", 3));
  for (CopulaVariant variant : {CopulaVariant::Independence, CopulaVariant::Gaussian}) {
    std::vector<double> flat = random_flat(3, variant, rng);
    FamilyState st = build_family_state(std::span<const double>(flat), 3, variant);
    const int s = 1000;
    Rng noise_rng(derive_seed(19, "test-family-noise", 4));
    std::vector<double> noise(3 * s);
    for (auto& v : noise)
      v = (variant == CopulaVariant::Independence) ? noise_rng.uniform() : noise_rng.normal();
    std::vector<double> theta = sample_joint(st, std::span<const double>(noise), s);
    for (int k = 0; k < s; ++k)
      for (int j = 0; j < 3; ++j) {
        double v = theta[3 * k + j];
        CHECK(v >= st.densities[j].delta1);
        CHECK(v <= st.densities[j].grid.back());
      }
  }
}

TEST_CASE("joint density integrates to one") {
  Rng rng(derive_seed(19, "test-family", 5));
  for (CopulaVariant variant : {CopulaVariant::Independence, CopulaVariant::Gaussian}) {
    std::vector<double> flat = random_flat(2, variant, rng);
    FamilyState st = build_family_state(std::span<const double>(flat), 2, variant);
    const int n = 64;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::vector<double> th = {
            st.densities[0].grid[i] - 0.5 * st.densities[0].spacing,
            st.densities[1].grid[j] - 0.5 * st.densities[1].spacing};
        acc += std::exp(log_q(st, std::span<const double>(th))) * st.densities[0].spacing *
               st.densities[1].spacing;
      }
    CHECK(acc == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("checkpoints round trip bitwise") {
  Rng rng(derive_seed(19, "test-family", 6));
  for (CopulaVariant variant : {CopulaVariant::Independence, CopulaVariant::Gaussian}) {
    std::vector<double> flat = random_flat(2, variant, rng);
    VariationalParams zeta = unpack(std::span<const double>(flat), 2, variant);
    const char* path = "family_checkpoint_test.txt";
    write_checkpoint(path, zeta);
    VariationalParams back = read_checkpoint(path);
    std::vector<double> round = pack(back);
    REQUIRE(round.size() == flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(round[i] == flat[i]);
    std::remove(path);
  }
}

TEST_CASE("checkpoint header validation") {
  const char* path = "family_checkpoint_bad.txt";
  {
    std::ofstream out(path);
    out << "wcvx 1\ndim 1\nvariant independence\ngrid 32\nvalues 34\n";
    for (int i = 0; i < 34; ++i) out << "1.0\n";
  }
  CHECK_THROWS_AS(read_checkpoint(path), InvalidInputError);
  std::remove(path);
  CHECK_THROWS_AS(read_checkpoint("no_such_checkpoint_file.txt"), InvalidInputError);
}

TEST_CASE("family input validation") {
  std::vector<double> flat(10, 1.0);
  CHECK_THROWS_AS(
      build_family_state(std::span<const double>(flat), 2, CopulaVariant::Independence),
      InvalidInputError);
  std::vector<double> ok = uniform_flat(2, CopulaVariant::Independence, 0.0, 1.0);
  FamilyState st = build_family_state(std::span<const double>(ok), 2, CopulaVariant::Independence);
  std::vector<double> noise(5, 0.5);
  CHECK_THROWS_AS(sample_joint(st, std::span<const double>(noise), 2), InvalidInputError);
}
