#include "equibin/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "equibin/special.hpp"

namespace equibin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727;

double normal_log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double lognormal_log_pdf(double x, double mu, double sigma) {
  if (!(x > 0.0)) return -kInf;
  const double lx = std::log(x);
  const double z = (lx - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi - lx;
}

double gamma_log_pdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return -kInf;
  return (shape - 1.0) * std::log(x) - x / scale - shape * std::log(scale) -
         std::lgamma(shape);
}

double exponential_log_pdf(double x, double scale) {
  if (x < 0.0) return -kInf;
  return -std::log(scale) - x / scale;
}

}  // namespace

Family family_from_string(const std::string& s) {
  if (s == "exponential") return Family::exponential;
  if (s == "normal") return Family::normal;
  if (s == "lognormal") return Family::lognormal;
  if (s == "gamma") return Family::gamma;
  if (s == "normal_mixture2") return Family::normal_mixture2;
  if (s == "lognormal_mixture2") return Family::lognormal_mixture2;
  std::string names;
  for (const auto& n : all_family_names()) names += (names.empty() ? "" : ", ") + n;
  throw std::runtime_error("unknown family '" + s + "'; known families: " + names);
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::normal: return "normal";
    case Family::lognormal: return "lognormal";
    case Family::gamma: return "gamma";
    case Family::normal_mixture2: return "normal_mixture2";
    case Family::lognormal_mixture2: return "lognormal_mixture2";
  }
  return "?";
}

std::vector<std::string> all_family_names() {
  return {"exponential", "normal",          "lognormal",
          "gamma",       "normal_mixture2", "lognormal_mixture2"};
}

int param_count(Family f) {
  switch (f) {
    case Family::exponential: return 1;
    case Family::normal:
    case Family::lognormal:
    case Family::gamma: return 2;
    case Family::normal_mixture2:
    case Family::lognormal_mixture2: return 5;
  }
  return 0;
}

std::vector<std::string> param_names(Family f) {
  switch (f) {
    case Family::exponential: return {"scale"};
    case Family::normal: return {"mu", "sigma"};
    case Family::lognormal: return {"log_mu", "log_sigma"};
    case Family::gamma: return {"shape", "scale"};
    case Family::normal_mixture2:
      return {"w", "mu1", "sigma1", "mu2", "sigma2"};
    case Family::lognormal_mixture2:
      return {"w", "log_mu1", "log_sigma1", "log_mu2", "log_sigma2"};
  }
  return {};
}

std::vector<ParamKind> param_kinds(Family f) {
  using K = ParamKind;
  switch (f) {
    case Family::exponential: return {K::positive};
    case Family::normal: return {K::real, K::positive};
    case Family::lognormal: return {K::real, K::positive};
    case Family::gamma: return {K::positive, K::positive};
    case Family::normal_mixture2:
      return {K::unit_interval, K::real, K::positive, K::real, K::positive};
    case Family::lognormal_mixture2:
      return {K::unit_interval, K::real, K::positive, K::real, K::positive};
  }
  return {};
}

bool positive_support(Family f) {
  switch (f) {
    case Family::exponential:
    case Family::lognormal:
    case Family::gamma:
    case Family::lognormal_mixture2: return true;
    default: return false;
  }
}

bool params_valid(Family f, std::span<const double> p) {
  const auto kinds = param_kinds(f);
  if (p.size() != kinds.size()) return false;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (!std::isfinite(p[i])) return false;
    switch (kinds[i]) {
      case ParamKind::positive:
        if (!(p[i] > 0.0)) return false;
        break;
      case ParamKind::unit_interval:
        if (!(p[i] > 0.0 && p[i] < 1.0)) return false;
        break;
      case ParamKind::real: break;
    }
  }
  return true;
}

double family_log_pdf(Family f, std::span<const double> p, double x) {
  switch (f) {
    case Family::exponential: return exponential_log_pdf(x, p[0]);
    case Family::normal: return normal_log_pdf(x, p[0], p[1]);
    case Family::lognormal: return lognormal_log_pdf(x, p[0], p[1]);
    case Family::gamma: return gamma_log_pdf(x, p[0], p[1]);
    case Family::normal_mixture2:
      return log_sum_exp(std::log(p[0]) + normal_log_pdf(x, p[1], p[2]),
                         std::log1p(-p[0]) + normal_log_pdf(x, p[3], p[4]));
    case Family::lognormal_mixture2:
      return log_sum_exp(std::log(p[0]) + lognormal_log_pdf(x, p[1], p[2]),
                         std::log1p(-p[0]) + lognormal_log_pdf(x, p[3], p[4]));
  }
  return -kInf;
}

double family_cdf(Family f, std::span<const double> p, double x) {
  switch (f) {
    case Family::exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-x / p[0]);
    case Family::normal: return standard_normal_cdf((x - p[0]) / p[1]);
    case Family::lognormal:
      return x <= 0.0 ? 0.0 : standard_normal_cdf((std::log(x) - p[0]) / p[1]);
    case Family::gamma:
      return x <= 0.0 ? 0.0 : regularized_gamma_p(p[0], x / p[1]);
    case Family::normal_mixture2:
      return p[0] * standard_normal_cdf((x - p[1]) / p[2]) +
             (1.0 - p[0]) * standard_normal_cdf((x - p[3]) / p[4]);
    case Family::lognormal_mixture2: {
      if (x <= 0.0) return 0.0;
      const double lx = std::log(x);
      return p[0] * standard_normal_cdf((lx - p[1]) / p[2]) +
             (1.0 - p[0]) * standard_normal_cdf((lx - p[3]) / p[4]);
    }
  }
  return 0.0;
}

double family_quantile(Family f, std::span<const double> p, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    if (prob == 0.0) return positive_support(f) ? 0.0 : -kInf;
    if (prob == 1.0) return kInf;
    throw std::invalid_argument("family_quantile: probability outside [0,1]");
  }
  switch (f) {
    case Family::exponential: return -p[0] * std::log1p(-prob);
    case Family::normal: return p[0] + p[1] * standard_normal_quantile(prob);
    case Family::lognormal:
      return std::exp(p[0] + p[1] * standard_normal_quantile(prob));
    case Family::gamma:
      return p[1] * regularized_gamma_p_inverse(p[0], prob);
    case Family::normal_mixture2: {
      const double q1 = p[1] + p[2] * standard_normal_quantile(prob);
      const double q2 = p[3] + p[4] * standard_normal_quantile(prob);
      return invert_monotone_cdf(
          [&](double x) { return family_cdf(f, p, x); }, prob, std::min(q1, q2),
          std::max(q1, q2) + 1e-12);
    }
    case Family::lognormal_mixture2: {
      const double z = standard_normal_quantile(prob);
      const double q1 = p[1] + p[2] * z;
      const double q2 = p[3] + p[4] * z;
      // invert on the log axis, where the mixture is a normal mixture
      const double lq = invert_monotone_cdf(
          [&](double lx) {
            return p[0] * standard_normal_cdf((lx - p[1]) / p[2]) +
                   (1.0 - p[0]) * standard_normal_cdf((lx - p[3]) / p[4]);
          },
          prob, std::min(q1, q2), std::max(q1, q2) + 1e-12);
      return std::exp(lq);
    }
  }
  return 0.0;
}

double weighted_log_likelihood(Family f, std::span<const double> p,
                               const MetricDataset& d) {
  if (!params_valid(f, p))
    throw std::invalid_argument("weighted_log_likelihood: invalid parameters for " +
                                family_to_string(f));
  double total = 0.0;
  for (const auto& s : d.samples) {
    if (s.weight == 0.0) continue;  // zero-weight points carry no information
    const double lp = family_log_pdf(f, p, s.value);
    if (lp == -kInf) return -kInf;
    total += s.weight * lp;
  }
  return total;
}

}  // namespace equibin
