#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "equibin/binning.hpp"
#include "equibin/dataset.hpp"
#include "equibin/equivtest.hpp"
#include "equibin/fit.hpp"

namespace equibin {

// Wilson score interval for a binomial proportion, clipped to [0,1].
Interval wilson_interval(std::size_t successes, std::size_t n, double level = 0.95);

struct PowerConfig {
  std::size_t replicate_size = 0;
  std::size_t reps = 50;
  std::vector<Family> candidates;  // refit and reselected per replicate
  SamplerConfig sampler;           // reduced draws by default for power runs
  RopeConfig rope;
  BinWeightConfig bin_weights;
  std::uint64_t seed = 0;
};

struct PowerCell {
  std::size_t successes = 0;
  double power = 0.0;
  Interval wilson;
};

struct MetricPower {
  std::string metric_id;
  PowerCell theta, big_theta, both;
};

struct PowerResult {
  std::size_t reps = 0;
  std::size_t nonconverged_replicates = 0;  // counted as failures
  std::vector<MetricPower> metrics;
};

// Bootstrap power: resample replicate datasets from the weighted parent, run
// the full per-metric equivalence test against the reference, and tally the
// pass rates.  Parent and reference metric lists must be row-aligned within
// themselves.  Deterministic given the seed.
PowerResult bootstrap_power(const std::vector<MetricDataset>& parent,
                            const std::vector<MetricDataset>& reference,
                            const PowerConfig& cfg);

}  // namespace equibin
