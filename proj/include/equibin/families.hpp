#pragma once

#include <span>
#include <string>
#include <vector>

#include "equibin/dataset.hpp"

namespace equibin {

enum class Family {
  exponential,
  normal,
  lognormal,
  gamma,
  normal_mixture2,
  lognormal_mixture2,
};

// parameter kinds on the constrained scale
enum class ParamKind { real, positive, unit_interval };

Family family_from_string(const std::string& s);
std::string family_to_string(Family f);
std::vector<std::string> all_family_names();

int param_count(Family f);
std::vector<std::string> param_names(Family f);
std::vector<ParamKind> param_kinds(Family f);
bool positive_support(Family f);

bool params_valid(Family f, std::span<const double> p);

// density / cdf / quantile on the family's natural axis
double family_log_pdf(Family f, std::span<const double> p, double x);
double family_cdf(Family f, std::span<const double> p, double x);
double family_quantile(Family f, std::span<const double> p, double prob);

// sum over samples of weight * log f(value); -inf when any positive-weight
// sample falls outside the support
double weighted_log_likelihood(Family f, std::span<const double> p,
                               const MetricDataset& d);

}  // namespace equibin
