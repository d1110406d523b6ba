#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "equibin/rng.hpp"

namespace equibin {

struct SamplerConfig {
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;  // kept per chain
  std::uint64_t seed = 0;
  std::uint64_t stream_tag = 0;  // mixed into every chain stream
  bool parallel_chains = true;
};

// log target density on the unconstrained scale; must return -inf (not throw)
// outside the support
using LogDensity = std::function<double(std::span<const double>)>;

struct ChainRun {
  std::vector<double> draws;  // kept draws, row-major [draw][dim], unconstrained
  double accept_rate = 0.0;
};

// Adaptive random-walk Metropolis.  Step scale follows a Robbins-Monro
// recursion toward the target acceptance rate and the proposal covariance is
// estimated from warmup history; both freeze when sampling starts.
// init_proposal_scale seeds the proposal sd per unconstrained coordinate;
// posteriors concentrate like 1/sqrt(n), so callers pass a data-sized hint.
ChainRun run_chain(const LogDensity& log_target, std::span<const double> init,
                   int warmup, int draws, Rng rng,
                   double init_proposal_scale = 1.0);

}  // namespace equibin
