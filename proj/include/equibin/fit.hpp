#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "equibin/dataset.hpp"
#include "equibin/families.hpp"
#include "equibin/sampler.hpp"

namespace equibin {

struct LooResult {
  double elpd = 0.0;
  std::vector<double> pareto_k;  // per data point
  bool reliable = true;          // <=10% of points with k > 0.7
};

// One posterior parameter draw, evaluated on the metric's original axis.
// sign = -1 means the family was fitted to negated values (positive-support
// families on negative-valued metrics).
struct PosteriorDraw {
  Family family;
  int sign = 1;
  std::span<const double> params;

  double log_pdf(double x) const {
    return family_log_pdf(family, params, sign * x);
  }
  double cdf(double x) const {
    const double c = family_cdf(family, params, sign > 0 ? x : -x);
    return sign > 0 ? c : 1.0 - c;
  }
  double quantile(double p) const {
    return sign > 0 ? family_quantile(family, params, p)
                    : -family_quantile(family, params, 1.0 - p);
  }
};

struct FittedModel {
  std::string metric_id;
  Family family = Family::normal;
  int sign = 1;
  std::size_t n_data = 0;
  std::vector<std::string> parameter_names;
  std::size_t draw_count = 0;    // pooled over chains
  std::vector<double> draws;     // row-major [draw][param], constrained scale
  std::vector<double> rhat, ess;
  double accept_rate = 0.0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::uint64_t stream_tag = 0;
  std::optional<LooResult> loo;

  int dim() const { return param_count(family); }
  PosteriorDraw draw(std::size_t s) const {
    return PosteriorDraw{family, sign,
                         std::span<const double>(draws.data() + s * dim(), dim())};
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.95;
};

// Shortest contiguous window over the sorted samples containing
// ceil(mass * n) of them; earliest window on ties.
Interval hdi(std::span<const double> samples, double mass = 0.95);

FittedModel fit_posterior(Family f, const MetricDataset& d, const SamplerConfig& cfg);

// Pareto-smoothed importance-sampling LOO with weighted log-likelihood
// exponents; elpd is the weight-scaled sum of pointwise contributions.
LooResult loo_elpd(const FittedModel& m, const MetricDataset& d);

// Fit of the generalized Pareto shape to sorted positive exceedances
// (Zhang-Stephens estimator with the usual shrinkage toward 0.5).
double gpd_shape_fit(std::span<const double> sorted_exceedances, double* sigma_out);

// Converged candidate with maximal elpd; ties break toward fewer parameters.
// Candidates must carry loo results.
std::size_t select_model(std::span<const FittedModel> candidates);

}  // namespace equibin
