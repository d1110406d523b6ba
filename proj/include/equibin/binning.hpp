#pragma once

#include <span>
#include <vector>

#include "equibin/dataset.hpp"
#include "equibin/fit.hpp"

namespace equibin {

struct BinWeightConfig {
  double p0 = 0.02;        // baseline injury risk anchoring omega = 1
  double epsilon = 1e-4;   // keeps the minimum weight above zero
  double omega_b = 1.0;    // baseline bin weight
};

// N = min(floor(n / m), n_max); throws when n < m
int choose_bin_count(std::size_t n, std::size_t m, std::size_t n_max);

// interior quantile cuts of the reference draw at i/N, i = 1..N-1
std::vector<double> partition_boundaries(const PosteriorDraw& ref_draw, int bins);

// analytic per-bin mass of a draw against given boundaries; sums to 1
std::vector<double> bin_proportions(const PosteriorDraw& draw,
                                    std::span<const double> boundaries);

// Reference samples pre-sorted by value with prefix sums of weight and
// weight*outcome, so per-draw bin means are O(N log n).
struct SortedOutcomeData {
  std::vector<double> values;     // ascending
  std::vector<double> prefix_w;   // size n+1
  std::vector<double> prefix_wo;  // size n+1
};

SortedOutcomeData prepare_outcome_data(const MetricDataset& ref);

// weighted mean outcome per bin; values on a boundary fall in the lower bin;
// empty bins get 0
void per_bin_mean_outcome_sorted(const SortedOutcomeData& data,
                                 std::span<const double> boundaries,
                                 std::span<double> out);

std::vector<double> per_bin_mean_outcome(const MetricDataset& ref,
                                         std::span<const double> boundaries);

// omega_i = (mean_outcome_i + epsilon) / (p0 + epsilon)
std::vector<double> bin_weights(std::span<const double> mean_outcome,
                                const BinWeightConfig& cfg);

// One draw pair's complete bin structure: reference-quantile boundaries,
// both proportion vectors, per-bin outcome means, and bin weights.
struct BinPartition {
  int bins = 0;
  std::vector<double> boundaries;    // bins-1 interior cuts, increasing
  std::vector<double> p_ref;         // exactly 1/N each by construction
  std::vector<double> p_syn;
  std::vector<double> mean_outcome;  // weighted reference outcome per bin
  std::vector<double> omega;

  void validate() const;  // throws on invariant violation
};

// Builds the partition for one paired draw.  When the two draws are
// bitwise identical the synthetic proportions are pinned at 1/N, the exact
// value the quantile construction defines for the partitioning draw itself.
BinPartition build_partition(const PosteriorDraw& ref_draw,
                             const PosteriorDraw& syn_draw,
                             const SortedOutcomeData& ref_data, int bins,
                             const BinWeightConfig& cfg);

// MAIS2+ injury risk of the lead-vehicle driver as a logistic in delta-v [m/s]
double injury_risk(double delta_v);

}  // namespace equibin
