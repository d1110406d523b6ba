#include "equibin/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace equibin {

int choose_bin_count(std::size_t n, std::size_t m, std::size_t n_max) {
  if (m < 1 || n_max < 1)
    throw std::invalid_argument("choose_bin_count: m and n_max must be >= 1");
  if (n < m)
    throw std::invalid_argument(
        "choose_bin_count: fewer samples than the per-bin minimum (n=" +
        std::to_string(n) + ", m=" + std::to_string(m) + ")");
  return static_cast<int>(std::min(n / m, n_max));
}

std::vector<double> partition_boundaries(const PosteriorDraw& ref_draw, int bins) {
  if (bins < 1) throw std::invalid_argument("partition_boundaries: bins < 1");
  std::vector<double> b;
  b.reserve(bins - 1);
  for (int i = 1; i < bins; ++i) {
    const double q = ref_draw.quantile(static_cast<double>(i) / bins);
    if (!std::isfinite(q))
      throw std::runtime_error("partition_boundaries: non-finite quantile");
    b.push_back(q);
  }
  for (std::size_t i = 1; i < b.size(); ++i)
    if (!(b[i] > b[i - 1]))
      throw std::runtime_error("partition_boundaries: boundaries not increasing");
  return b;
}

std::vector<double> bin_proportions(const PosteriorDraw& draw,
                                    std::span<const double> boundaries) {
  std::vector<double> p(boundaries.size() + 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const double c = draw.cdf(boundaries[i]);
    p[i] = std::max(c - prev, 0.0);
    prev = c;
  }
  p.back() = std::max(1.0 - prev, 0.0);
  return p;
}

SortedOutcomeData prepare_outcome_data(const MetricDataset& ref) {
  if (!ref.has_outcomes())
    throw std::runtime_error("metric '" + ref.metric_id +
                             "': every reference sample needs a re-simulated outcome");
  struct Row {
    double v, w, o;
  };
  std::vector<Row> rows;
  rows.reserve(ref.n());
  for (const auto& s : ref.samples) rows.push_back({s.value, s.weight, *s.outcome});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.v != b.v) return a.v < b.v;
    if (a.w != b.w) return a.w < b.w;
    return a.o < b.o;
  });
  SortedOutcomeData d;
  d.values.reserve(rows.size());
  d.prefix_w.assign(rows.size() + 1, 0.0);
  d.prefix_wo.assign(rows.size() + 1, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.values.push_back(rows[i].v);
    d.prefix_w[i + 1] = d.prefix_w[i] + rows[i].w;
    d.prefix_wo[i + 1] = d.prefix_wo[i] + rows[i].w * rows[i].o;
  }
  return d;
}

void per_bin_mean_outcome_sorted(const SortedOutcomeData& data,
                                 std::span<const double> boundaries,
                                 std::span<double> out) {
  const std::size_t bins = boundaries.size() + 1;
  if (out.size() != bins)
    throw std::invalid_argument("per_bin_mean_outcome_sorted: output size mismatch");
  std::size_t lo = 0;
  for (std::size_t i = 0; i < bins; ++i) {
    // values exactly on a boundary belong to the lower bin
    const std::size_t hi =
        (i < boundaries.size())
            ? static_cast<std::size_t>(
                  std::upper_bound(data.values.begin(), data.values.end(),
                                   boundaries[i]) -
                  data.values.begin())
            : data.values.size();
    const double w = data.prefix_w[hi] - data.prefix_w[lo];
    const double wo = data.prefix_wo[hi] - data.prefix_wo[lo];
    out[i] = (w > 0.0) ? wo / w : 0.0;
    lo = hi;
  }
}

std::vector<double> per_bin_mean_outcome(const MetricDataset& ref,
                                         std::span<const double> boundaries) {
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i] > boundaries[i - 1]))
      throw std::invalid_argument("per_bin_mean_outcome: boundaries not increasing");
  const SortedOutcomeData data = prepare_outcome_data(ref);
  std::vector<double> out(boundaries.size() + 1);
  per_bin_mean_outcome_sorted(data, boundaries, out);
  return out;
}

std::vector<double> bin_weights(std::span<const double> mean_outcome,
                                const BinWeightConfig& cfg) {
  if (!(cfg.p0 > 0.0) || !(cfg.epsilon > 0.0))
    throw std::invalid_argument("bin_weights: p0 and epsilon must be positive");
  std::vector<double> w;
  w.reserve(mean_outcome.size());
  for (double m : mean_outcome) {
    if (!(m >= 0.0) || !(m <= 1.0))
      throw std::invalid_argument("bin_weights: mean outcome outside [0,1]");
    w.push_back((m + cfg.epsilon) / (cfg.p0 + cfg.epsilon));
  }
  return w;
}

void BinPartition::validate() const {
  const std::size_t n = static_cast<std::size_t>(bins);
  if (boundaries.size() + 1 != n || p_ref.size() != n || p_syn.size() != n ||
      mean_outcome.size() != n || omega.size() != n)
    throw std::runtime_error("BinPartition: inconsistent sizes");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i] > boundaries[i - 1]))
      throw std::runtime_error("BinPartition: boundaries not increasing");
  double ref_sum = 0.0, syn_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p_ref[i] >= 0.0) || !(p_syn[i] >= 0.0) || !(omega[i] > 0.0))
      throw std::runtime_error("BinPartition: negative entries");
    ref_sum += p_ref[i];
    syn_sum += p_syn[i];
  }
  if (std::abs(ref_sum - 1.0) > 1e-9 || std::abs(syn_sum - 1.0) > 1e-9)
    throw std::runtime_error("BinPartition: proportions do not sum to 1");
}

BinPartition build_partition(const PosteriorDraw& ref_draw,
                             const PosteriorDraw& syn_draw,
                             const SortedOutcomeData& ref_data, int bins,
                             const BinWeightConfig& cfg) {
  BinPartition part;
  part.bins = bins;
  part.boundaries = partition_boundaries(ref_draw, bins);
  part.p_ref.assign(bins, 1.0 / static_cast<double>(bins));
  const bool same_draw =
      ref_draw.family == syn_draw.family && ref_draw.sign == syn_draw.sign &&
      std::equal(ref_draw.params.begin(), ref_draw.params.end(),
                 syn_draw.params.begin(), syn_draw.params.end());
  part.p_syn = same_draw ? part.p_ref : bin_proportions(syn_draw, part.boundaries);
  part.mean_outcome.resize(bins);
  per_bin_mean_outcome_sorted(ref_data, part.boundaries, part.mean_outcome);
  part.omega = bin_weights(part.mean_outcome, cfg);
  return part;
}

double injury_risk(double delta_v) {
  if (delta_v < 0.0)
    throw std::invalid_argument("injury_risk: delta_v must be non-negative");
  return 1.0 / (1.0 + std::exp(6.1818 - 0.3315 * delta_v));
}

}  // namespace equibin
