#include "equibin/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <omp.h>

#include "equibin/special.hpp"

namespace equibin {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kParetoKThreshold = 0.7;

double gpd_quantile(double p, double k, double sigma) {
  if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}
}  // namespace

double gpd_shape_fit(std::span<const double> y, double* sigma_out) {
  const std::size_t n = y.size();
  if (n < 5) throw std::invalid_argument("gpd_shape_fit: too few exceedances");
  const std::size_t grid =
      30 + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const double ymax = y[n - 1];
  const double ystar = y[static_cast<std::size_t>(std::floor(n / 4.0 + 0.5)) - 1];
  if (!(ymax > 0.0) || !(ystar > 0.0))
    throw std::invalid_argument("gpd_shape_fit: exceedances must be positive");

  std::vector<double> theta(grid), loglik(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    const double jj = static_cast<double>(j) + 1.0;
    theta[j] = 1.0 / ymax +
               (1.0 - std::sqrt(static_cast<double>(grid) / (jj - 0.5))) /
                   (3.0 * ystar);
    double k = 0.0;
    for (double v : y) k += std::log1p(-theta[j] * v);
    k /= static_cast<double>(n);
    if (theta[j] == 0.0 || k == 0.0 || !std::isfinite(k)) {
      loglik[j] = -kInf;
      continue;
    }
    loglik[j] = static_cast<double>(n) * (std::log(-theta[j] / k) - k - 1.0);
    if (!std::isfinite(loglik[j])) loglik[j] = -kInf;
  }
  const double lse = log_sum_exp(loglik);
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < grid; ++j)
    theta_hat += theta[j] * std::exp(loglik[j] - lse);

  double k_hat = 0.0;
  for (double v : y) k_hat += std::log1p(-theta_hat * v);
  k_hat /= static_cast<double>(n);
  const double sigma = -k_hat / theta_hat;
  // shrink toward 0.5 with prior weight 10
  k_hat = (k_hat * static_cast<double>(n) + 5.0) / (static_cast<double>(n) + 10.0);
  if (sigma_out) *sigma_out = sigma;
  return k_hat;
}

LooResult loo_elpd(const FittedModel& m, const MetricDataset& d) {
  if (m.draw_count < 1000)
    throw std::invalid_argument("loo_elpd: needs at least 1000 posterior draws");
  d.validate();

  const std::size_t s_count = m.draw_count;
  const std::size_t n = d.n();
  const std::size_t tail = static_cast<std::size_t>(
      std::ceil(0.2 * static_cast<double>(s_count)));

  std::vector<double> point_elpd(n, 0.0);
  std::vector<double> pareto_k(n, 0.0);
  std::vector<int> failed(n, 0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    try {
      const double x = d.samples[j].value;
      const double w = d.samples[j].weight;

      std::vector<double> ll(s_count);
      for (std::size_t s = 0; s < s_count; ++s) ll[s] = m.draw(s).log_pdf(x);

      // raw importance log-ratios for removing this point's weighted
      // contribution from the posterior
      std::vector<double> lr(s_count);
      double lr_max = -kInf;
      for (std::size_t s = 0; s < s_count; ++s) {
        lr[s] = -w * ll[s];
        lr_max = std::max(lr_max, lr[s]);
      }

      std::vector<std::size_t> order(s_count);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return lr[a] < lr[b]; });

      const double cutoff_lr = lr[order[s_count - tail - 1]];
      const double cutoff = std::exp(cutoff_lr - lr_max);
      const double r_top = std::exp(lr[order[s_count - 1]] - lr_max);

      // smooth only the strictly positive exceedances; ties at the cutoff
      // stay as they are
      std::vector<std::size_t> tail_pos;
      std::vector<double> exceed;
      tail_pos.reserve(tail);
      exceed.reserve(tail);
      for (std::size_t t = 0; t < tail; ++t) {
        const std::size_t pos = s_count - tail + t;
        const double e = std::exp(lr[order[pos]] - lr_max) - cutoff;
        if (e > 0.0) {
          tail_pos.push_back(pos);
          exceed.push_back(e);
        }
      }
      double k = -kInf;
      if (exceed.size() >= 5 && r_top - cutoff > 1e-14) {
        double sigma = 0.0;
        k = gpd_shape_fit(exceed, &sigma);
        if (std::isfinite(k) && sigma > 0.0) {
          // replace tail ratios by expected order statistics of the fit
          const double m = static_cast<double>(exceed.size());
          for (std::size_t t = 0; t < tail_pos.size(); ++t) {
            const double p = (static_cast<double>(t) + 0.5) / m;
            const double smoothed =
                std::min(cutoff + gpd_quantile(p, k, sigma), r_top);
            lr[order[tail_pos[t]]] = lr_max + std::log(smoothed);
          }
        } else {
          k = -kInf;
        }
      }

      // elpd_j = log( sum r~ * f / sum r~ ), computed in log space
      std::vector<double> num(s_count), den(s_count);
      for (std::size_t s = 0; s < s_count; ++s) {
        den[s] = lr[s];
        num[s] = lr[s] + ll[s];
      }
      point_elpd[j] = log_sum_exp(num) - log_sum_exp(den);
      pareto_k[j] = k;
    } catch (...) {
      failed[jj] = 1;
    }
  }

  for (std::size_t j = 0; j < n; ++j)
    if (failed[j]) throw std::runtime_error("loo_elpd: pointwise computation failed");

  LooResult out;
  out.pareto_k = std::move(pareto_k);
  double elpd = 0.0;
  for (std::size_t j = 0; j < n; ++j) elpd += d.samples[j].weight * point_elpd[j];
  out.elpd = elpd;
  const std::size_t high = static_cast<std::size_t>(
      std::count_if(out.pareto_k.begin(), out.pareto_k.end(),
                    [](double k) { return k > kParetoKThreshold; }));
  out.reliable = high * 10 <= n;
  return out;
}

}  // namespace equibin
