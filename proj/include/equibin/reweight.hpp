#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "equibin/dataset.hpp"

namespace equibin {

struct ScmSeedRecord {
  std::string seed_id;
  double omega_seed = 0.0;   // seed-case weight
  std::int64_t n_sim = 0;    // simulation runs for this seed
  std::int64_t n_crash = 0;  // re-simulated crashes for this seed
};

// Per-crash weight c * omega_seed / n_crash per seed, with c chosen so the
// weights of all crashes sum to total_crashes.  Seeds without crashes drop out.
std::map<std::string, double> scm_resim_weights(
    std::span<const ScmSeedRecord> seeds, std::size_t total_crashes);

// k-NN density-ratio weights on a single metric: weight_j proportional to
// rho_ref(x_j) / rho_syn(x_j), normalized so the weights sum to n.
std::vector<double> knn_reweight(const MetricDataset& syn,
                                 const MetricDataset& ref, std::size_t k);

}  // namespace equibin
