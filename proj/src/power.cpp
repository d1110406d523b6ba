#include "equibin/power.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "equibin/rng.hpp"
#include "equibin/special.hpp"

namespace equibin {

Interval wilson_interval(std::size_t successes, std::size_t n, double level) {
  if (n < 1) throw std::invalid_argument("wilson_interval: n must be >= 1");
  if (successes > n)
    throw std::invalid_argument("wilson_interval: successes > n");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("wilson_interval: level must be in (0,1)");
  const double z = standard_normal_quantile(0.5 * (1.0 + level));
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval out;
  out.lo = std::max(0.0, center - half);
  out.hi = std::min(1.0, center + half);
  out.mass = level;
  return out;
}

namespace {

struct ReplicateOutcome {
  std::vector<unsigned char> theta_pass, big_theta_pass, both_pass;  // per metric
  bool nonconverged = false;
};

std::uint64_t metric_tag(const std::string& metric, Family f, Role role) {
  return combine64(combine64(hash_tag(metric), static_cast<std::uint64_t>(f)),
                   role == Role::reference ? 0x9E1Du : 0x51A7u);
}

// fit every applicable candidate, attach loo, return the selected model
FittedModel fit_and_select(const std::vector<Family>& candidates,
                           const MetricDataset& d, const SamplerConfig& base_cfg,
                           std::uint64_t extra_tag, Role role) {
  std::vector<FittedModel> fits;
  std::string last_error = "no candidate family applies";
  for (Family f : candidates) {
    SamplerConfig cfg = base_cfg;
    cfg.stream_tag = combine64(extra_tag, metric_tag(d.metric_id, f, role));
    try {
      FittedModel m = fit_posterior(f, d, cfg);
      m.loo = loo_elpd(m, d);
      fits.push_back(std::move(m));
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  if (fits.empty())
    throw std::runtime_error("no usable candidate for metric '" + d.metric_id +
                             "': " + last_error);
  if (std::none_of(fits.begin(), fits.end(),
                   [](const FittedModel& m) { return m.converged; })) {
    // keep the best-effort model; callers treat non-convergence as failure
    return fits.front();
  }
  return fits[select_model(fits)];
}

}  // namespace

PowerResult bootstrap_power(const std::vector<MetricDataset>& parent,
                            const std::vector<MetricDataset>& reference,
                            const PowerConfig& cfg) {
  if (parent.empty() || reference.empty())
    throw std::invalid_argument("bootstrap_power: empty inputs");
  if (parent.size() != reference.size())
    throw std::invalid_argument("bootstrap_power: metric list mismatch");
  if (cfg.reps < 1) throw std::invalid_argument("bootstrap_power: reps < 1");
  if (cfg.replicate_size < 2)
    throw std::invalid_argument("bootstrap_power: replicate_size < 2");
  if (cfg.candidates.empty())
    throw std::invalid_argument("bootstrap_power: no candidate families");
  const std::size_t n_parent = parent.front().n();
  for (const auto& p : parent) {
    p.validate();
    if (p.n() != n_parent)
      throw std::invalid_argument("bootstrap_power: parent metrics not row-aligned");
  }
  for (const auto& r : reference)
    if (!r.has_outcomes())
      throw std::invalid_argument("bootstrap_power: reference metric '" +
                                  r.metric_id + "' lacks outcomes");

  const std::size_t n_metrics = parent.size();

  // reference side is fixed across replicates; fit once
  std::vector<FittedModel> ref_models;
  ref_models.reserve(n_metrics);
  SamplerConfig ref_cfg = cfg.sampler;
  ref_cfg.seed = cfg.seed;
  for (const auto& r : reference)
    ref_models.push_back(
        fit_and_select(cfg.candidates, r, ref_cfg, 0xFEEDu, Role::reference));

  // cumulative parent weights for the resampling probabilities
  std::vector<double> cum(n_parent);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_parent; ++i) {
    const double w = parent.front().samples[i].weight;
    if (!(w >= 0.0))
      throw std::invalid_argument("bootstrap_power: negative parent weight");
    acc += w;
    cum[i] = acc;
  }
  if (!(acc > 0.0))
    throw std::invalid_argument("bootstrap_power: parent weights sum to zero");

  std::vector<ReplicateOutcome> outcomes(cfg.reps);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(cfg.reps); ++rr) {
    const std::size_t rep = static_cast<std::size_t>(rr);
    ReplicateOutcome& oc = outcomes[rep];
    oc.theta_pass.assign(n_metrics, 0);
    oc.big_theta_pass.assign(n_metrics, 0);
    oc.both_pass.assign(n_metrics, 0);

    Rng rng = Rng::stream(cfg.seed, {0xB007u, rep});
    std::vector<std::size_t> idx(cfg.replicate_size);
    for (auto& i : idx) {
      const double u = rng.uniform() * acc;
      i = static_cast<std::size_t>(
          std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      if (i >= n_parent) i = n_parent - 1;
    }

    for (std::size_t m = 0; m < n_metrics; ++m) {
      MetricDataset rep_data;
      rep_data.metric_id = parent[m].metric_id;
      rep_data.role = Role::synthetic;
      rep_data.samples.reserve(cfg.replicate_size);
      for (std::size_t i : idx)
        rep_data.samples.push_back({parent[m].samples[i].value, 1.0, std::nullopt});

      SamplerConfig rep_cfg = cfg.sampler;
      rep_cfg.seed = cfg.seed;
      rep_cfg.parallel_chains = false;
      try {
        const FittedModel syn_model = fit_and_select(
            cfg.candidates, rep_data, rep_cfg, combine64(0xB007u, rep),
            Role::synthetic);
        if (!syn_model.converged) {
          oc.nonconverged = true;
          continue;  // counted as failure for every statistic
        }
        const EquivalenceResult res = run_metric_test(
            ref_models[m], syn_model, reference[m], cfg.rope, cfg.bin_weights);
        oc.theta_pass[m] = res.theta_pass ? 1 : 0;
        oc.big_theta_pass[m] = res.big_theta_pass ? 1 : 0;
        oc.both_pass[m] = res.metric_equivalent ? 1 : 0;
      } catch (const std::exception&) {
        oc.nonconverged = true;
      }
    }
  }

  PowerResult out;
  out.reps = cfg.reps;
  out.metrics.resize(n_metrics);
  for (std::size_t m = 0; m < n_metrics; ++m) {
    MetricPower& mp = out.metrics[m];
    mp.metric_id = parent[m].metric_id;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      mp.theta.successes += outcomes[rep].theta_pass[m];
      mp.big_theta.successes += outcomes[rep].big_theta_pass[m];
      mp.both.successes += outcomes[rep].both_pass[m];
    }
    for (PowerCell* cell : {&mp.theta, &mp.big_theta, &mp.both}) {
      cell->power = static_cast<double>(cell->successes) /
                    static_cast<double>(cfg.reps);
      cell->wilson = wilson_interval(cell->successes, cfg.reps);
    }
  }
  for (const auto& oc : outcomes)
    if (oc.nonconverged) ++out.nonconverged_replicates;
  return out;
}

}  // namespace equibin
