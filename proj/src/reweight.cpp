#include "equibin/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace equibin {

std::map<std::string, double> scm_resim_weights(
    std::span<const ScmSeedRecord> seeds, std::size_t total_crashes) {
  if (seeds.empty()) throw std::invalid_argument("scm_resim_weights: no seeds");
  std::int64_t crash_sum = 0;
  double omega_sum = 0.0;
  for (const auto& s : seeds) {
    if (!(s.omega_seed >= 0.0) || !std::isfinite(s.omega_seed))
      throw std::invalid_argument("seed '" + s.seed_id +
                                  "': weight must be finite and >= 0");
    if (s.n_crash < 0 || s.n_sim < 0 || s.n_crash > s.n_sim)
      throw std::invalid_argument("seed '" + s.seed_id +
                                  "': need 0 <= n_crash <= n_sim");
    crash_sum += s.n_crash;
    if (s.n_crash > 0) omega_sum += s.omega_seed;
  }
  if (crash_sum == 0)
    throw std::invalid_argument("scm_resim_weights: no seed produced a crash");
  if (static_cast<std::size_t>(crash_sum) != total_crashes)
    throw std::invalid_argument(
        "scm_resim_weights: total_crashes (" + std::to_string(total_crashes) +
        ") does not match the seed table (" + std::to_string(crash_sum) + ")");
  if (!(omega_sum > 0.0))
    throw std::invalid_argument(
        "scm_resim_weights: all crash-producing seeds have zero weight");

  const double c = static_cast<double>(total_crashes) / omega_sum;
  std::map<std::string, double> out;
  for (const auto& s : seeds) {
    if (s.n_crash == 0) continue;
    if (!out.emplace(s.seed_id, c * s.omega_seed / static_cast<double>(s.n_crash))
             .second)
      throw std::invalid_argument("scm_resim_weights: duplicate seed id '" +
                                  s.seed_id + "'");
  }
  return out;
}

namespace {

// Distance to the k-th nearest of a sorted array.  One exact copy of the
// query is skipped when present, so a dataset compared against itself sees
// the same neighborhoods on both sides.
double kth_nearest_distance(const std::vector<double>& sorted, double x,
                            std::size_t k) {
  const std::size_t n = sorted.size();
  const bool has_exact = std::binary_search(sorted.begin(), sorted.end(), x);
  const std::size_t need = k + (has_exact ? 1 : 0);
  if (need > n)
    throw std::invalid_argument("knn_reweight: k too large for dataset size");
  // walk outward from the insertion point, picking the nearer side
  std::size_t right = static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
  std::size_t left = right;  // elements < x live at [0, left)
  double dist = 0.0;
  for (std::size_t taken = 0; taken < need; ++taken) {
    const double dl = (left > 0) ? x - sorted[left - 1]
                                 : std::numeric_limits<double>::infinity();
    const double dr = (right < n) ? sorted[right] - x
                                  : std::numeric_limits<double>::infinity();
    if (dl <= dr) {
      dist = dl;
      --left;
    } else {
      dist = dr;
      ++right;
    }
  }
  return dist;
}

}  // namespace

std::vector<double> knn_reweight(const MetricDataset& syn,
                                 const MetricDataset& ref, std::size_t k) {
  if (k < 1) throw std::invalid_argument("knn_reweight: k must be >= 1");
  syn.validate();
  ref.validate();
  if (k > ref.n() || k + 1 > syn.n())
    throw std::invalid_argument("knn_reweight: k too large for dataset size");

  std::vector<double> ref_sorted, syn_sorted;
  ref_sorted.reserve(ref.n());
  syn_sorted.reserve(syn.n());
  for (const auto& s : ref.samples) ref_sorted.push_back(s.value);
  for (const auto& s : syn.samples) syn_sorted.push_back(s.value);
  std::sort(ref_sorted.begin(), ref_sorted.end());
  std::sort(syn_sorted.begin(), syn_sorted.end());

  const double lo = std::min(ref_sorted.front(), syn_sorted.front());
  const double hi = std::max(ref_sorted.back(), syn_sorted.back());
  // duplicate-heavy data can give zero k-th distances
  const double floor_dist = std::max(1e-9 * (hi - lo), 1e-300);

  const std::size_t n = syn.n();
  std::vector<double> w(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    const double x = syn.samples[j].value;
    const double d_ref =
        std::max(kth_nearest_distance(ref_sorted, x, k), floor_dist);
    const double d_syn =
        std::max(kth_nearest_distance(syn_sorted, x, k), floor_dist);
    // rho_ref / rho_syn = (n_syn * d_syn) / (n_ref * d_ref)
    w[j] = (static_cast<double>(syn.n()) * d_syn) /
           (static_cast<double>(ref.n()) * d_ref);
  }

  double sum = 0.0;
  for (double v : w) sum += v;
  const double scale = static_cast<double>(n) / sum;
  for (double& v : w) v *= scale;
  return w;
}

}  // namespace equibin
