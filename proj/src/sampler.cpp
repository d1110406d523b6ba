#include "equibin/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace equibin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// lower-triangular Cholesky factor; returns false when not positive definite
bool cholesky(const std::vector<double>& a, int d, std::vector<double>& l) {
  l.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (int k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        l[i * d + i] = std::sqrt(s);
      } else {
        l[i * d + j] = s / l[j * d + j];
      }
    }
  }
  return true;
}

struct CovAccumulator {
  int d = 0;
  std::size_t count = 0;
  std::vector<double> mean, m2;

  explicit CovAccumulator(int dim)
      : d(dim), mean(dim, 0.0), m2(static_cast<std::size_t>(dim) * dim, 0.0) {}

  void push(std::span<const double> x) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    std::vector<double> delta(d);
    for (int i = 0; i < d; ++i) {
      delta[i] = x[i] - mean[i];
      mean[i] += delta[i] * inv;
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        const double upd = delta[i] * (x[j] - mean[j]);
        m2[i * d + j] += upd;
        if (i != j) m2[j * d + i] += upd;
      }
  }

  // covariance with a small diagonal ridge
  std::vector<double> covariance() const {
    std::vector<double> c(m2);
    const double inv = 1.0 / static_cast<double>(count - 1);
    double max_diag = 0.0;
    for (auto& v : c) v *= inv;
    for (int i = 0; i < d; ++i) max_diag = std::max(max_diag, c[i * d + i]);
    const double ridge = 1e-6 * max_diag + 1e-12;
    for (int i = 0; i < d; ++i) c[i * d + i] += ridge;
    return c;
  }
};

}  // namespace

ChainRun run_chain(const LogDensity& log_target, std::span<const double> init,
                   int warmup, int draws, Rng rng, double init_proposal_scale) {
  const int d = static_cast<int>(init.size());
  if (d <= 0) throw std::invalid_argument("run_chain: empty parameter vector");
  if (warmup < 10 || draws < 1)
    throw std::invalid_argument("run_chain: warmup/draws too small");
  if (!(init_proposal_scale > 0.0))
    throw std::invalid_argument("run_chain: bad proposal scale");

  std::vector<double> z(init.begin(), init.end());
  double lp = log_target(z);
  if (!std::isfinite(lp))
    throw std::runtime_error("run_chain: initial point has non-finite density");

  const double target_accept = (d == 1) ? 0.44 : 0.234;
  double log_step = std::log(2.38 / std::sqrt(static_cast<double>(d)));

  std::vector<double> chol_l(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) chol_l[i * d + i] = init_proposal_scale;

  CovAccumulator acc(d);
  const int adapt_start = std::max(25, warmup / 10);
  const int cov_start = std::max(100, warmup / 3);
  const std::size_t min_cov_samples = static_cast<std::size_t>(20 + 5 * d);

  ChainRun out;
  out.draws.reserve(static_cast<std::size_t>(draws) * d);
  std::vector<double> prop(d), xi(d);
  std::size_t accepted = 0;

  const int total = warmup + draws;
  for (int t = 0; t < total; ++t) {
    for (int i = 0; i < d; ++i) xi[i] = rng.normal();
    const double step = std::exp(log_step);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j <= i; ++j) s += chol_l[i * d + j] * xi[j];
      prop[i] = z[i] + step * s;
    }
    double lpp = log_target(prop);
    if (std::isnan(lpp)) lpp = -kInf;
    double alpha = 0.0;
    if (lpp >= lp)
      alpha = 1.0;
    else if (lpp > -kInf)
      alpha = std::exp(lpp - lp);
    if (rng.uniform() < alpha) {
      z = prop;
      lp = lpp;
      if (t >= warmup) ++accepted;
    }

    if (t < warmup) {
      const double gain = 1.0 / std::pow(static_cast<double>(t) + 1.0, 0.6);
      log_step += gain * (alpha - target_accept);
      log_step = std::clamp(log_step, -20.0, 5.0);
      if (t >= adapt_start) acc.push(z);
      if (t >= cov_start && t % 50 == 0 && acc.count >= min_cov_samples) {
        std::vector<double> l;
        if (cholesky(acc.covariance(), d, l)) chol_l = std::move(l);
      }
    } else {
      out.draws.insert(out.draws.end(), z.begin(), z.end());
    }
  }
  out.accept_rate = static_cast<double>(accepted) / static_cast<double>(draws);
  return out;
}

}  // namespace equibin
