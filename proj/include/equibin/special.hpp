#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace equibin {

double standard_normal_cdf(double x);
double standard_normal_quantile(double p);
double standard_normal_log_pdf(double x);

// regularized lower incomplete gamma P(a, x)
double regularized_gamma_p(double a, double x);
// inverse of P(a, .) in x for p in (0, 1)
double regularized_gamma_p_inverse(double a, double p);

double log_sum_exp(double a, double b);
double log_sum_exp(std::span<const double> v);

// Monotone root solve of cdf(x) = p on a bracket grown from [lo, hi].
// Bisection with Newton-style secant refinement; used by quantile inversions
// that have no closed form.
double invert_monotone_cdf(const std::function<double(double)>& cdf, double p,
                           double lo, double hi);

struct WeightedMoments {
  double mean = 0.0;
  double sd = 0.0;
  double weight_sum = 0.0;
  std::size_t count = 0;
};

WeightedMoments weighted_moments(std::span<const double> values,
                                 std::span<const double> weights);

}  // namespace equibin
