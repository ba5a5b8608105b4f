#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcvi/elbo.hpp"

// Adaptive full-vector random-walk Metropolis, used as the ground-truth
// posterior oracle.  Per-dimension proposal scales are global_scale *
// sqrt(running variance); the global scale follows a Robbins-Monro recursion
// log s <- log s + t^{-0.6} (acc - 0.234) during burn-in and is frozen
// afterwards, so the post-burn-in kernel satisfies detailed balance.

namespace wcvi {

struct Chain {
  int dim = 0;
  int n_draws = 0;
  std::vector<double> draws;  // row-major n_draws x dim, post burn-in only
  double acceptance_rate = 0.0;
  std::vector<double> step_scales;  // frozen per-dimension proposal sds
  std::span<const double> row(int t) const {
    return std::span<const double>(draws).subspan(static_cast<std::size_t>(t) * dim, dim);
  }
};

Chain run_rwm(const ModelSpec& model, int iterations, int burn_in, std::uint64_t seed,
              std::span<const double> start = {});

struct ChainSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  bool degenerate = false;  // constant chain: sd and ess are meaningless
};

std::vector<ChainSummary> summarize(const Chain& chain);

// Type-7 quantile of an ascending sample.
double sample_quantile(std::span<const double> sorted, double q);

// Effective sample size by FFT autocovariance with Geyer initial-positive-
// sequence truncation; 0 for constant input.
double effective_sample_size(std::span<const double> x);

void write_chain_csv(const std::string& path, const Chain& chain);

}  // namespace wcvi
