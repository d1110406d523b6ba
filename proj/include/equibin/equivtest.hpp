#pragma once

#include <span>
#include <string>
#include <vector>

#include "equibin/binning.hpp"
#include "equibin/dataset.hpp"
#include "equibin/fit.hpp"

namespace equibin {

enum class OverallRule { all_metrics, critical_subset };

struct RopeConfig {
  double alpha = 0.95;     // HDI posterior mass
  double tol_rel = 0.10;   // |dP/P_ref| tolerance at the baseline bin
  double tol_abs = 0.05;   // |dP| tolerance at the baseline bin
  std::size_t min_bin_samples = 40;
  std::size_t max_bins = 20;
  OverallRule rule = OverallRule::all_metrics;
  std::vector<std::string> critical_metrics;
};

// (theta_thd, big_theta_thd) = (tol_rel, tol_abs) * omega_b
std::pair<double, double> rope_thresholds(const RopeConfig& cfg,
                                          const BinWeightConfig& bw = {});

// per-bin relative-deviation ceiling implied by theta_thd at bin weight omega
double per_bin_relative_ceiling(double theta_thd, double omega);

// max_i |dP_i / p_ref_i| * omega_i
double theta_statistic(std::span<const double> p_ref,
                       std::span<const double> p_syn,
                       std::span<const double> omega);

// sum_i |dP_i| * omega_i
double big_theta_statistic(std::span<const double> p_ref,
                           std::span<const double> p_syn,
                           std::span<const double> omega);

// Per-pair statistics over paired posterior draws.  Boundaries, bin weights
// and synthetic proportions are recomputed for every pair from the reference
// draw.  Outputs are indexed by pair, so the parallel and serial paths agree
// bit for bit.
struct DrawStatistics {
  int bins = 0;
  std::size_t pairs = 0;
  std::vector<double> theta;        // [pair]
  std::vector<double> big_theta;    // [pair]
  std::vector<double> rel_contrib;  // [pair * bins + bin]
  std::vector<double> abs_contrib;  // [pair * bins + bin]
};

DrawStatistics compute_draw_statistics(const FittedModel& ref_model,
                                       const FittedModel& syn_model,
                                       const MetricDataset& ref_data, int bins,
                                       const BinWeightConfig& bw, bool parallel);

inline DrawStatistics compute_draw_statistics_serial(
    const FittedModel& ref_model, const FittedModel& syn_model,
    const MetricDataset& ref_data, int bins, const BinWeightConfig& bw) {
  return compute_draw_statistics(ref_model, syn_model, ref_data, bins, bw, false);
}

struct BinContribution {
  int bin = 0;  // 1-based
  double rel_mean = 0.0;
  Interval rel_hdi;
  double abs_mean = 0.0;
  Interval abs_hdi;
};

struct EquivalenceResult {
  std::string metric_id;
  int bins = 0;
  std::size_t draw_pairs = 0;
  std::vector<double> theta_samples, big_theta_samples;
  Interval theta_hdi, big_theta_hdi;
  double theta_thd = 0.0, big_theta_thd = 0.0;
  bool theta_pass = false, big_theta_pass = false, metric_equivalent = false;
  std::vector<BinContribution> bin_contributions;  // bin order
  std::vector<std::string> warnings;
};

EquivalenceResult run_metric_test(const FittedModel& ref_model,
                                  const FittedModel& syn_model,
                                  const MetricDataset& ref_data,
                                  const RopeConfig& cfg,
                                  const BinWeightConfig& bw);

struct VerdictReport {
  bool equivalent = false;
  std::vector<std::string> notes;
};

VerdictReport overall_verdict(std::span<const EquivalenceResult> results,
                              const RopeConfig& cfg);

// contributions sorted by mean weighted relative deviation, descending
std::vector<BinContribution> diagnose(const EquivalenceResult& result);

}  // namespace equibin
