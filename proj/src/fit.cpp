#include "equibin/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "equibin/diagnostics.hpp"
#include "equibin/special.hpp"

namespace equibin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhatLimit = 1.05;

struct Prior {
  std::vector<ParamKind> kinds;
  std::vector<double> loc;    // normal location (real params only)
  std::vector<double> scale;  // normal sd / half-normal scale

  double log_density(std::span<const double> p) const {
    double lp = 0.0;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      switch (kinds[i]) {
        case ParamKind::real: {
          const double z = (p[i] - loc[i]) / scale[i];
          lp += -0.5 * z * z - std::log(scale[i]);
          break;
        }
        case ParamKind::positive: {
          const double z = p[i] / scale[i];
          lp += -0.5 * z * z - std::log(scale[i]);  // half-normal, constant folded out
          break;
        }
        case ParamKind::unit_interval:
          break;  // uniform(0,1)
      }
    }
    return lp;
  }
};

void constrain(std::span<const ParamKind> kinds, std::span<const double> z,
               std::span<double> p) {
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    switch (kinds[i]) {
      case ParamKind::real: p[i] = z[i]; break;
      case ParamKind::positive: p[i] = std::exp(z[i]); break;
      case ParamKind::unit_interval: p[i] = 1.0 / (1.0 + std::exp(-z[i])); break;
    }
  }
}

std::vector<double> unconstrain(std::span<const ParamKind> kinds,
                                std::span<const double> p) {
  std::vector<double> z(p.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    switch (kinds[i]) {
      case ParamKind::real: z[i] = p[i]; break;
      case ParamKind::positive: z[i] = std::log(p[i]); break;
      case ParamKind::unit_interval: z[i] = std::log(p[i] / (1.0 - p[i])); break;
    }
  }
  return z;
}

double log_jacobian(std::span<const ParamKind> kinds, std::span<const double> z) {
  double lj = 0.0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    switch (kinds[i]) {
      case ParamKind::real: break;
      case ParamKind::positive: lj += z[i]; break;
      case ParamKind::unit_interval: {
        // log sigma(z) + log sigma(-z)
        const double a = -std::log1p(std::exp(-z[i]));
        const double b = -std::log1p(std::exp(z[i]));
        lj += a + b;
        break;
      }
    }
  }
  return lj;
}

bool uses_log_moments(Family f) {
  return f == Family::lognormal || f == Family::lognormal_mixture2;
}

Prior make_prior(Family f, const WeightedMoments& m) {
  Prior pr;
  pr.kinds = param_kinds(f);
  pr.loc.assign(pr.kinds.size(), 0.0);
  pr.scale.assign(pr.kinds.size(), 1.0);
  const double loc_scale = 10.0 * m.sd;
  switch (f) {
    case Family::exponential:
      pr.scale = {loc_scale};
      break;
    case Family::normal:
    case Family::lognormal:
      pr.loc = {m.mean, 0.0};
      pr.scale = {loc_scale, loc_scale};
      break;
    case Family::gamma:
      pr.scale = {10.0, loc_scale};  // dimensionless shape, data-scaled scale
      break;
    case Family::normal_mixture2:
    case Family::lognormal_mixture2:
      pr.loc = {0.0, m.mean, 0.0, m.mean, 0.0};
      pr.scale = {1.0, loc_scale, loc_scale, loc_scale, loc_scale};
      break;
  }
  return pr;
}

std::vector<double> moment_init(Family f, const WeightedMoments& m) {
  const double sd = std::max(m.sd, 1e-12);
  switch (f) {
    case Family::exponential:
      return {std::max(m.mean, 1e-8)};
    case Family::normal:
    case Family::lognormal:
      return {m.mean, sd};
    case Family::gamma: {
      const double mean = std::max(m.mean, 1e-8);
      double shape = (mean / sd) * (mean / sd);
      shape = std::clamp(shape, 1e-2, 1e6);
      double scale = sd * sd / mean;
      scale = std::clamp(scale, 1e-12, 1e12);
      return {shape, scale};
    }
    case Family::normal_mixture2:
    case Family::lognormal_mixture2:
      return {0.5, m.mean - sd, 0.7 * sd, m.mean + sd, 0.7 * sd};
  }
  return {};
}

// canonical component order for two-component mixtures
void relabel_mixture(Family f, std::span<double> p) {
  if (f != Family::normal_mixture2 && f != Family::lognormal_mixture2) return;
  if (p[1] > p[3]) {
    std::swap(p[1], p[3]);
    std::swap(p[2], p[4]);
    p[0] = 1.0 - p[0];
  }
}

int resolve_sign(Family f, const MetricDataset& d) {
  if (!positive_support(f)) return 1;
  const bool strict = f != Family::exponential;
  bool all_pos = true, all_neg = true;
  for (const auto& s : d.samples) {
    if (strict ? (s.value <= 0.0) : (s.value < 0.0)) all_pos = false;
    if (strict ? (s.value >= 0.0) : (s.value > 0.0)) all_neg = false;
  }
  if (all_pos) return 1;
  if (all_neg) return -1;
  throw std::runtime_error("family " + family_to_string(f) +
                           " requires single-signed data for metric '" +
                           d.metric_id + "'");
}

}  // namespace

FittedModel fit_posterior(Family f, const MetricDataset& d, const SamplerConfig& cfg) {
  d.validate();
  const int sign = resolve_sign(f, d);

  MetricDataset fit_data = d;
  if (sign < 0)
    for (auto& s : fit_data.samples) s.value = -s.value;

  std::vector<double> values, weights;
  values.reserve(fit_data.n());
  weights.reserve(fit_data.n());
  for (const auto& s : fit_data.samples) {
    values.push_back(s.value);
    weights.push_back(s.weight);
  }
  const WeightedMoments moments = weighted_moments(values, weights);
  if (!(moments.sd > 0.0))
    throw std::runtime_error("degenerate data for metric '" + d.metric_id +
                             "': zero weighted variance");

  WeightedMoments prior_moments = moments;
  if (uses_log_moments(f)) {
    std::vector<double> logs(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) logs[i] = std::log(values[i]);
    prior_moments = weighted_moments(logs, weights);
    if (!(prior_moments.sd > 0.0))
      throw std::runtime_error("degenerate data for metric '" + d.metric_id +
                               "': zero variance on the log scale");
  }

  const auto kinds = param_kinds(f);
  const int dim = param_count(f);
  const Prior prior = make_prior(f, prior_moments);

  const LogDensity log_target = [&](std::span<const double> z) -> double {
    std::vector<double> p(dim);
    constrain(kinds, z, p);
    if (!params_valid(f, p)) return -kInf;
    const double ll = weighted_log_likelihood(f, p, fit_data);
    if (ll == -kInf) return -kInf;
    return ll + prior.log_density(p) + log_jacobian(kinds, z);
  };

  const std::vector<double> z_init = unconstrain(kinds, moment_init(f, prior_moments));

  // Likelihood curvature scales with the total weight, so the posterior
  // width shrinks like 1/sqrt(sum w); size proposals and chain jitter
  // accordingly.  (Depends on the weights only through their sum, keeping
  // a weight-2 sample exactly equivalent to a duplicated one.)
  double w_sum = 0.0;
  for (double w : weights) w_sum += w;
  const double init_scale =
      std::clamp(1.0 / std::sqrt(std::max(w_sum, 1.0)), 1e-4, 1.0);

  std::vector<std::vector<double>> chain_draws(cfg.chains);
  std::vector<double> chain_accept(cfg.chains, 0.0);
  std::vector<std::string> chain_errors(cfg.chains);

#pragma omp parallel for schedule(static) if (cfg.parallel_chains)
  for (int c = 0; c < cfg.chains; ++c) {
    try {
      Rng rng = Rng::stream(cfg.seed, {cfg.stream_tag, 0x5A17u, static_cast<std::uint64_t>(c)});
      std::vector<double> z0 = z_init;
      for (auto& z : z0) z += 2.0 * init_scale * rng.normal();
      ChainRun run = run_chain(log_target, z0, cfg.warmup, cfg.draws, rng, init_scale);
      // convert to constrained scale, canonical mixture order
      std::vector<double> constrained(run.draws.size());
      std::vector<double> p(dim);
      for (int s = 0; s < cfg.draws; ++s) {
        std::span<const double> z(run.draws.data() + static_cast<std::size_t>(s) * dim, dim);
        constrain(kinds, z, p);
        relabel_mixture(f, p);
        std::copy(p.begin(), p.end(),
                  constrained.begin() + static_cast<std::size_t>(s) * dim);
      }
      chain_draws[c] = std::move(constrained);
      chain_accept[c] = run.accept_rate;
    } catch (const std::exception& e) {
      chain_errors[c] = e.what();
    }
  }
  for (const auto& err : chain_errors)
    if (!err.empty()) throw std::runtime_error("fit_posterior: " + err);

  FittedModel m;
  m.metric_id = d.metric_id;
  m.family = f;
  m.sign = sign;
  m.n_data = d.n();
  m.parameter_names = param_names(f);
  m.seed = cfg.seed;
  m.stream_tag = cfg.stream_tag;
  m.draw_count = static_cast<std::size_t>(cfg.chains) * cfg.draws;
  m.draws.reserve(m.draw_count * dim);
  for (const auto& c : chain_draws) m.draws.insert(m.draws.end(), c.begin(), c.end());
  double acc = 0.0;
  for (double a : chain_accept) acc += a;
  m.accept_rate = acc / cfg.chains;

  const ConvergenceDiagnostics diag = compute_diagnostics(chain_draws, dim);
  m.rhat = diag.rhat;
  m.ess = diag.ess;
  m.converged = std::all_of(m.rhat.begin(), m.rhat.end(), [](double r) {
    return std::isfinite(r) && r <= kRhatLimit;
  });
  return m;
}

std::size_t select_model(std::span<const FittedModel> candidates) {
  if (candidates.empty()) throw std::runtime_error("select_model: no candidates");
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (!c.converged) continue;
    if (!c.loo) throw std::runtime_error("select_model: candidate without loo result");
    if (best == candidates.size()) {
      best = i;
      continue;
    }
    const auto& b = candidates[best];
    const double ei = c.loo->elpd, eb = b.loo->elpd;
    if (ei > eb || (ei == eb && param_count(c.family) < param_count(b.family)))
      best = i;
  }
  if (best == candidates.size())
    throw std::runtime_error("select_model: no converged candidate");
  return best;
}

}  // namespace equibin
