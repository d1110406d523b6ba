#include "equibin/equivtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace equibin {

std::pair<double, double> rope_thresholds(const RopeConfig& cfg,
                                          const BinWeightConfig& bw) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw std::invalid_argument("rope_thresholds: alpha must be in (0,1)");
  if (!(cfg.tol_rel > 0.0) || !(cfg.tol_abs > 0.0))
    throw std::invalid_argument("rope_thresholds: tolerances must be positive");
  return {cfg.tol_rel * bw.omega_b, cfg.tol_abs * bw.omega_b};
}

double per_bin_relative_ceiling(double theta_thd, double omega) {
  if (!(omega > 0.0))
    throw std::invalid_argument("per_bin_relative_ceiling: omega must be positive");
  return theta_thd / omega;
}

double theta_statistic(std::span<const double> p_ref,
                       std::span<const double> p_syn,
                       std::span<const double> omega) {
  if (p_ref.size() != p_syn.size() || p_ref.size() != omega.size())
    throw std::invalid_argument("theta_statistic: size mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < p_ref.size(); ++i) {
    if (!(p_ref[i] > 0.0))
      throw std::invalid_argument("theta_statistic: zero reference proportion");
    best = std::max(best, std::abs((p_syn[i] - p_ref[i]) / p_ref[i]) * omega[i]);
  }
  return best;
}

double big_theta_statistic(std::span<const double> p_ref,
                           std::span<const double> p_syn,
                           std::span<const double> omega) {
  if (p_ref.size() != p_syn.size() || p_ref.size() != omega.size())
    throw std::invalid_argument("big_theta_statistic: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p_ref.size(); ++i)
    total += std::abs(p_syn[i] - p_ref[i]) * omega[i];
  return total;
}

DrawStatistics compute_draw_statistics(const FittedModel& ref_model,
                                       const FittedModel& syn_model,
                                       const MetricDataset& ref_data, int bins,
                                       const BinWeightConfig& bw, bool parallel) {
  if (bins < 1) throw std::invalid_argument("compute_draw_statistics: bins < 1");
  const std::size_t pairs = std::min(ref_model.draw_count, syn_model.draw_count);
  if (pairs == 0) throw std::invalid_argument("compute_draw_statistics: no draws");

  const SortedOutcomeData outcome_data = prepare_outcome_data(ref_data);
  if (!(bw.p0 > 0.0) || !(bw.epsilon > 0.0))
    throw std::invalid_argument("compute_draw_statistics: bad bin weight config");

  DrawStatistics out;
  out.bins = bins;
  out.pairs = pairs;
  out.theta.resize(pairs);
  out.big_theta.resize(pairs);
  out.rel_contrib.resize(pairs * bins);
  out.abs_contrib.resize(pairs * bins);

  int failed = 0;
  std::string error;

#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t ss = 0; ss < static_cast<std::ptrdiff_t>(pairs); ++ss) {
    const std::size_t s = static_cast<std::size_t>(ss);
    try {
      const BinPartition part = build_partition(
          ref_model.draw(s), syn_model.draw(s), outcome_data, bins, bw);
      double theta = 0.0, big_theta = 0.0;
      for (int i = 0; i < bins; ++i) {
        const double dp = part.p_syn[i] - part.p_ref[i];
        const double rel = std::abs(dp / part.p_ref[i]) * part.omega[i];
        const double abs = std::abs(dp) * part.omega[i];
        out.rel_contrib[s * bins + i] = rel;
        out.abs_contrib[s * bins + i] = abs;
        theta = std::max(theta, rel);
        big_theta += abs;
      }
      out.theta[s] = theta;
      out.big_theta[s] = big_theta;
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = 1;
        error = e.what();
      }
    }
  }
  if (failed)
    throw std::runtime_error("compute_draw_statistics: " + error);
  return out;
}

EquivalenceResult run_metric_test(const FittedModel& ref_model,
                                  const FittedModel& syn_model,
                                  const MetricDataset& ref_data,
                                  const RopeConfig& cfg,
                                  const BinWeightConfig& bw) {
  EquivalenceResult r;
  r.metric_id = ref_data.metric_id;
  if (ref_model.draw_count != syn_model.draw_count)
    r.warnings.push_back(
        "draw-count mismatch (" + std::to_string(ref_model.draw_count) + " vs " +
        std::to_string(syn_model.draw_count) + "); pairs truncated to the minimum");

  r.bins = choose_bin_count(ref_data.n(), cfg.min_bin_samples, cfg.max_bins);
  const DrawStatistics stats =
      compute_draw_statistics(ref_model, syn_model, ref_data, r.bins, bw, true);
  r.draw_pairs = stats.pairs;
  r.theta_samples = stats.theta;
  r.big_theta_samples = stats.big_theta;

  const auto [theta_thd, big_theta_thd] = rope_thresholds(cfg, bw);
  r.theta_thd = theta_thd;
  r.big_theta_thd = big_theta_thd;

  r.theta_hdi = hdi(r.theta_samples, cfg.alpha);
  r.big_theta_hdi = hdi(r.big_theta_samples, cfg.alpha);

  // both statistics are >= 0 and the ROPE starts at 0, so containment
  // reduces to the upper endpoint
  r.theta_pass = r.theta_hdi.hi <= theta_thd;
  r.big_theta_pass = r.big_theta_hdi.hi <= big_theta_thd;
  r.metric_equivalent = r.theta_pass && r.big_theta_pass;

  r.bin_contributions.resize(r.bins);
  std::vector<double> column(stats.pairs);
  for (int i = 0; i < r.bins; ++i) {
    BinContribution& c = r.bin_contributions[i];
    c.bin = i + 1;
    double rel_sum = 0.0, abs_sum = 0.0;
    for (std::size_t s = 0; s < stats.pairs; ++s) {
      rel_sum += stats.rel_contrib[s * r.bins + i];
      abs_sum += stats.abs_contrib[s * r.bins + i];
    }
    c.rel_mean = rel_sum / static_cast<double>(stats.pairs);
    c.abs_mean = abs_sum / static_cast<double>(stats.pairs);
    for (std::size_t s = 0; s < stats.pairs; ++s)
      column[s] = stats.rel_contrib[s * r.bins + i];
    c.rel_hdi = hdi(column, 0.95);
    for (std::size_t s = 0; s < stats.pairs; ++s)
      column[s] = stats.abs_contrib[s * r.bins + i];
    c.abs_hdi = hdi(column, 0.95);
  }
  return r;
}

VerdictReport overall_verdict(std::span<const EquivalenceResult> results,
                              const RopeConfig& cfg) {
  if (results.empty())
    throw std::invalid_argument("overall_verdict: no metric results");
  VerdictReport report;
  if (cfg.rule == OverallRule::all_metrics) {
    report.equivalent = true;
    for (const auto& r : results) {
      if (!r.metric_equivalent) {
        report.equivalent = false;
        report.notes.push_back("metric '" + r.metric_id + "' failed equivalence");
      }
    }
    return report;
  }
  if (cfg.critical_metrics.empty())
    throw std::invalid_argument("overall_verdict: empty critical subset");
  for (const auto& name : cfg.critical_metrics) {
    const bool present = std::any_of(
        results.begin(), results.end(),
        [&](const EquivalenceResult& r) { return r.metric_id == name; });
    if (!present)
      throw std::invalid_argument("overall_verdict: critical metric '" + name +
                                  "' not among the results");
  }
  report.equivalent = true;
  for (const auto& r : results) {
    const bool critical =
        std::find(cfg.critical_metrics.begin(), cfg.critical_metrics.end(),
                  r.metric_id) != cfg.critical_metrics.end();
    if (!r.metric_equivalent) {
      if (critical) {
        report.equivalent = false;
        report.notes.push_back("critical metric '" + r.metric_id +
                               "' failed equivalence");
      } else {
        report.notes.push_back("non-critical metric '" + r.metric_id +
                               "' failed equivalence (non-blocking)");
      }
    }
  }
  return report;
}

std::vector<BinContribution> diagnose(const EquivalenceResult& result) {
  std::vector<BinContribution> sorted = result.bin_contributions;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const BinContribution& a, const BinContribution& b) {
                     return a.rel_mean > b.rel_mean;
                   });
  return sorted;
}

}  // namespace equibin
