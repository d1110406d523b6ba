#include "equibin/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace equibin {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.9189385332046727;
}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double standard_normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

// Wichura's AS 241 (PPND16) rational approximation, then one Newton step.
double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw std::invalid_argument("standard_normal_quantile: p outside [0,1]");
  }
  const double q = p - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) *
                 r +
             4.5921953931549871457e+4) *
                r +
            1.3731693765509461125e+4) *
               r +
           1.9715909503065514427e+3) *
              r +
          1.3314166789178437745e+2) *
             r +
         3.3871328727963666080e+0) /
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) *
                 r +
             2.1213794301586595867e+4) *
                r +
            5.3941960214247511077e+3) *
               r +
           6.8718700749205790830e+2) *
              r +
          4.2313330701600911252e+1) *
             r +
         1.0);
  } else {
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r +
                2.41780725177450611770e-1) *
                   r +
               1.27045825245236838258e+0) *
                  r +
              3.64784832476320460504e+0) *
                 r +
             5.76949722146069140550e+0) *
                r +
            4.63033784615654529590e+0) *
               r +
           1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r +
                1.51986665636164571966e-2) *
                   r +
               1.48103976427480074590e-1) *
                  r +
              6.89767334985100004550e-1) *
                 r +
             1.67638483018380384940e+0) *
                r +
            2.05319162663775882187e+0) *
               r +
           1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r +
                1.24266094738807843860e-3) *
                   r +
               2.65321895265761230930e-2) *
                  r +
              2.96560571828504891230e-1) *
                 r +
             1.78482653991729133580e+0) *
                r +
            5.46378491116411436990e+0) *
               r +
           6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r +
                1.84631831751005468180e-5) *
                   r +
               7.86869131145613259100e-4) *
                  r +
              1.48753612908506148525e-2) *
                 r +
             1.36929880922735805310e-1) *
                r +
            5.99832206555887937690e-1) *
               r +
           1.0);
    }
    if (q < 0.0) x = -x;
  }
  const double err = standard_normal_cdf(x) - p;
  const double pdf = std::exp(standard_normal_log_pdf(x));
  if (pdf > 0.0 && std::isfinite(err)) x -= err / pdf;
  return x;
}

namespace {

// series expansion of P(a, x), valid for x < a + 1
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q(a, x), valid for x >= a + 1
double gamma_q_cont_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a <= 0");
  if (x <= 0.0) return 0.0;
  if (!std::isfinite(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cont_fraction(a, x);
}

double regularized_gamma_p_inverse(double a, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("regularized_gamma_p_inverse: p outside (0,1)");
  // Wilson-Hilferty starting point
  const double z = standard_normal_quantile(p);
  double x;
  if (a > 0.5) {
    const double t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
    x = a * t * t * t;
  } else {
    x = std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
  }
  if (!(x > 0.0) || !std::isfinite(x)) x = a;

  const double lga = std::lgamma(a);
  for (int i = 0; i < 100; ++i) {
    const double f = regularized_gamma_p(a, x) - p;
    const double logpdf = (a - 1.0) * std::log(x) - x - lga;
    const double pdf = std::exp(logpdf);
    if (pdf <= 0.0 || !std::isfinite(pdf)) break;
    double step = f / pdf;
    double nx = x - step;
    if (nx <= 0.0) nx = 0.5 * x;
    if (std::abs(nx - x) <= 1e-15 * x) {
      x = nx;
      break;
    }
    x = nx;
  }
  // bisection fallback when Newton stalled away from the root
  if (std::abs(regularized_gamma_p(a, x) - p) > 1e-10) {
    double lo = 0.0, hi = std::max(x, a) * 2.0 + 10.0;
    while (regularized_gamma_p(a, hi) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (regularized_gamma_p(a, mid) < p)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    x = 0.5 * (lo + hi);
  }
  return x;
}

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (m == -kInf || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double invert_monotone_cdf(const std::function<double(double)>& cdf, double p,
                           double lo, double hi) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("invert_monotone_cdf: p outside (0,1)");
  double flo = cdf(lo);
  double fhi = cdf(hi);
  double width = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && flo > p; ++i) {
    hi = lo;
    lo -= width;
    width *= 2.0;
    flo = cdf(lo);
  }
  for (int i = 0; i < 200 && fhi < p; ++i) {
    lo = hi;
    hi += width;
    width *= 2.0;
    fhi = cdf(hi);
  }
  if (flo > p || fhi < p)
    throw std::runtime_error("invert_monotone_cdf: failed to bracket root");

  // alternate secant probes with plain bisection so the bracket provably
  // shrinks; convergence is judged on the bracket width alone
  for (int i = 0; i < 400; ++i) {
    double mid;
    if (i % 2 == 0 && fhi > flo) {
      mid = lo + (p - flo) * (hi - lo) / (fhi - flo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double fm = cdf(mid);
    if (fm < p) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::max(std::abs(lo), std::abs(hi))))
      break;
  }
  return 0.5 * (lo + hi);
}

WeightedMoments weighted_moments(std::span<const double> values,
                                 std::span<const double> weights) {
  if (values.size() != weights.size())
    throw std::invalid_argument("weighted_moments: size mismatch");
  WeightedMoments m;
  m.count = values.size();
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    wsum += weights[i];
    mean += weights[i] * values[i];
  }
  if (wsum <= 0.0) throw std::invalid_argument("weighted_moments: weight sum <= 0");
  mean /= wsum;
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    ss += weights[i] * d * d;
  }
  m.mean = mean;
  m.sd = std::sqrt(ss / wsum);
  m.weight_sum = wsum;
  return m;
}

}  // namespace equibin
