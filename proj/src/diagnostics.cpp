#include "equibin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace equibin {

namespace {

double sequence_mean(const std::vector<double>& s) {
  double m = 0.0;
  for (double x : s) m += x;
  return m / static_cast<double>(s.size());
}

double sequence_variance(const std::vector<double>& s, double mean) {
  double v = 0.0;
  for (double x : s) v += (x - mean) * (x - mean);
  return v / static_cast<double>(s.size() - 1);
}

// autocovariance at lag t, normalized by n
double autocovariance(const std::vector<double>& s, double mean, std::size_t t) {
  const std::size_t n = s.size();
  double c = 0.0;
  for (std::size_t i = 0; i + t < n; ++i)
    c += (s[i] - mean) * (s[i + t] - mean);
  return c / static_cast<double>(n);
}

}  // namespace

ConvergenceDiagnostics compute_diagnostics(
    const std::vector<std::vector<double>>& chains, int dim) {
  if (chains.empty() || dim <= 0)
    throw std::invalid_argument("compute_diagnostics: no chains");
  const std::size_t len = chains.front().size() / dim;
  for (const auto& c : chains)
    if (c.size() != len * static_cast<std::size_t>(dim))
      throw std::invalid_argument("compute_diagnostics: unequal chain lengths");
  const std::size_t half = len / 2;
  if (half < 4) throw std::invalid_argument("compute_diagnostics: chains too short");

  ConvergenceDiagnostics out;
  out.rhat.resize(dim);
  out.ess.resize(dim);

  for (int p = 0; p < dim; ++p) {
    // split each chain in half
    std::vector<std::vector<double>> seqs;
    seqs.reserve(chains.size() * 2);
    for (const auto& c : chains) {
      std::vector<double> a(half), b(half);
      for (std::size_t i = 0; i < half; ++i) {
        a[i] = c[i * dim + p];
        b[i] = c[(half + i) * dim + p];
      }
      seqs.push_back(std::move(a));
      seqs.push_back(std::move(b));
    }
    const std::size_t m = seqs.size();

    std::vector<double> means(m), vars(m);
    for (std::size_t j = 0; j < m; ++j) {
      means[j] = sequence_mean(seqs[j]);
      vars[j] = sequence_variance(seqs[j], means[j]);
    }
    double w = 0.0;
    for (double v : vars) w += v;
    w /= static_cast<double>(m);
    const double grand = sequence_mean(means);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= static_cast<double>(half) / static_cast<double>(m - 1);

    const double var_plus =
        (static_cast<double>(half - 1) / static_cast<double>(half)) * w +
        b / static_cast<double>(half);

    if (!(w > 0.0)) {
      // all sequences constant
      out.rhat[p] = (var_plus > 0.0) ? std::numeric_limits<double>::infinity() : 1.0;
      out.ess[p] = static_cast<double>(m * half);
      continue;
    }
    out.rhat[p] = std::sqrt(var_plus / w);

    // bulk ESS via Geyer's initial monotone sequence on the combined
    // autocorrelation estimate
    const std::size_t max_lag = half - 1;
    std::vector<double> rho(max_lag, 0.0);
    for (std::size_t t = 1; t < max_lag; ++t) {
      double acov = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        acov += autocovariance(seqs[j], means[j], t);
      acov /= static_cast<double>(m);
      rho[t] = 1.0 - (w - acov) / var_plus;
    }
    double tau = 1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t t = 1; t + 1 < max_lag; t += 2) {
      double pair = rho[t] + rho[t + 1];
      if (pair < 0.0) break;
      pair = std::min(pair, prev_pair);
      prev_pair = pair;
      tau += 2.0 * pair;
    }
    const double total = static_cast<double>(m * half);
    out.ess[p] = std::min(total, total / tau);
  }
  return out;
}

}  // namespace equibin
