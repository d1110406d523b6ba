#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <vector>

#include <unistd.h>

#include "equibin/fit.hpp"
#include "equibin/model_io.hpp"
#include "equibin/rng.hpp"

using namespace equibin;

namespace {

MetricDataset normal_data(std::size_t n, double mu, double sigma, std::uint64_t seed,
                          double weight = 1.0) {
  MetricDataset d;
  d.metric_id = "m";
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    d.samples.push_back({mu + sigma * rng.normal(), weight, {}});
  return d;
}

SamplerConfig quick_cfg(std::uint64_t seed, int chains = 4, int warmup = 400,
                        int draws = 400) {
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.chains = chains;
  cfg.warmup = warmup;
  cfg.draws = draws;
  return cfg;
}

double posterior_mean(const FittedModel& m, int param) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.draw_count; ++i) s += m.draws[i * m.dim() + param];
  return s / static_cast<double>(m.draw_count);
}

double posterior_sd(const FittedModel& m, int param) {
  const double mean = posterior_mean(m, param);
  double ss = 0.0;
  for (std::size_t i = 0; i < m.draw_count; ++i) {
    const double d = m.draws[i * m.dim() + param] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(m.draw_count - 1));
}

}  // namespace

TEST_CASE("fixed seed gives a bit-identical draw sequence") {
  const MetricDataset d = normal_data(150, 1.0, 2.0, 7);
  const FittedModel a = fit_posterior(Family::normal, d, quick_cfg(42));
  const FittedModel b = fit_posterior(Family::normal, d, quick_cfg(42));
  CHECK(a.draws == b.draws);
  CHECK(a.accept_rate == b.accept_rate);
  const FittedModel c = fit_posterior(Family::normal, d, quick_cfg(43));
  CHECK(a.draws != c.draws);
}

TEST_CASE("parallel and serial chains produce identical draws") {
  const MetricDataset d = normal_data(120, -0.5, 1.5, 8);
  SamplerConfig cfg = quick_cfg(11);
  cfg.parallel_chains = false;
  const FittedModel serial = fit_posterior(Family::normal, d, cfg);
  cfg.parallel_chains = true;
  const FittedModel parallel = fit_posterior(Family::normal, d, cfg);
  CHECK(serial.draws == parallel.draws);
}

TEST_CASE("a weight-2 sample is exactly a duplicated sample") {
  MetricDataset weighted;
  weighted.metric_id = "m";
  weighted.samples = {{1.3, 2.0, {}}, {0.4, 1.0, {}}, {-0.7, 1.0, {}}};
  MetricDataset duplicated;
  duplicated.metric_id = "m";
  duplicated.samples = {{1.3, 1.0, {}}, {1.3, 1.0, {}}, {0.4, 1.0, {}}, {-0.7, 1.0, {}}};
  const FittedModel a = fit_posterior(Family::normal, weighted, quick_cfg(5));
  const FittedModel b = fit_posterior(Family::normal, duplicated, quick_cfg(5));
  CHECK(a.draws == b.draws);
}

TEST_CASE("power-of-two weight scaling plus sum_to_n leaves the posterior unchanged") {
  MetricDataset d = normal_data(80, 2.0, 1.0, 9);
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    d.samples[i].weight = 0.5 + (i % 5) * 0.25;
  MetricDataset scaled = d;
  for (auto& s : scaled.samples) s.weight *= 8.0;  // exact in binary

  const MetricDataset n1 = normalize_weights(d, WeightMode::sum_to_n);
  const MetricDataset n2 = normalize_weights(scaled, WeightMode::sum_to_n);
  for (std::size_t i = 0; i < n1.samples.size(); ++i)
    CHECK(n1.samples[i].weight == n2.samples[i].weight);

  const FittedModel a = fit_posterior(Family::normal, n1, quick_cfg(77));
  const FittedModel b = fit_posterior(Family::normal, n2, quick_cfg(77));
  CHECK(a.draws == b.draws);
}

TEST_CASE("posterior concentrates on the generating parameters") {
  const MetricDataset d = normal_data(5000, 3.0, 2.0, 10);
  const FittedModel m =
      fit_posterior(Family::normal, d, quick_cfg(101, 4, 600, 600));
  CHECK(m.converged);
  CHECK(std::abs(posterior_mean(m, 0) - 3.0) < 3.0 * posterior_sd(m, 0) + 0.05);
  CHECK(std::abs(posterior_mean(m, 1) - 2.0) < 3.0 * posterior_sd(m, 1) + 0.05);
  for (double r : m.rhat) CHECK(r <= 1.05);
  for (double e : m.ess) CHECK(e > 50.0);
}

TEST_CASE("degenerate data is rejected") {
  MetricDataset d;
  d.metric_id = "m";
  d.samples = {{1.5, 1.0, {}}, {1.5, 1.0, {}}};
  CHECK_THROWS_WITH_AS(fit_posterior(Family::normal, d, quick_cfg(1)),
                       doctest::Contains("degenerate"), std::runtime_error);
}

TEST_CASE("positive-support family on negative data fits the mirrored axis") {
  MetricDataset d;
  d.metric_id = "t_nr";
  Rng rng(12);
  for (int i = 0; i < 300; ++i)
    d.samples.push_back({-std::exp(0.4 * rng.normal()), 1.0, {}});
  const FittedModel m = fit_posterior(Family::lognormal, d, quick_cfg(55));
  CHECK(m.sign == -1);
  CHECK(m.converged);
  const PosteriorDraw draw = m.draw(0);
  CHECK(draw.cdf(0.0) == doctest::Approx(1.0));
  CHECK(draw.quantile(0.5) < 0.0);

  // mixed-sign data cannot use a positive-support family
  d.samples.push_back({0.5, 1.0, {}});
  CHECK_THROWS(fit_posterior(Family::lognormal, d, quick_cfg(55)));
}

TEST_CASE("exponential fit recovers the scale on exponential data") {
  MetricDataset d;
  d.metric_id = "m";
  Rng rng(14);
  for (int i = 0; i < 400; ++i)
    d.samples.push_back({-2.5 * std::log(rng.uniform_pos()), 1.0, {}});
  const FittedModel m = fit_posterior(Family::exponential, d, quick_cfg(66));
  CHECK(m.converged);
  CHECK(m.dim() == 1);
  CHECK(posterior_mean(m, 0) == doctest::Approx(2.5).epsilon(0.15));
  // zeros are inside the exponential support
  d.samples.push_back({0.0, 1.0, {}});
  const FittedModel with_zero = fit_posterior(Family::exponential, d, quick_cfg(66));
  CHECK(with_zero.draw_count == with_zero.draws.size());
}

TEST_CASE("lognormal mixture fit stays ordered on two-scale positive data") {
  MetricDataset d;
  d.metric_id = "m";
  Rng rng(15);
  for (int i = 0; i < 500; ++i) {
    const bool small = rng.uniform() < 0.5;
    d.samples.push_back(
        {std::exp((small ? -1.5 : 1.5) + 0.3 * rng.normal()), 1.0, {}});
  }
  const FittedModel m =
      fit_posterior(Family::lognormal_mixture2, d, quick_cfg(67, 4, 1500, 1000));
  CHECK(m.converged);
  bool ordered = true;
  for (std::size_t s = 0; s < m.draw_count; ++s)
    ordered = ordered && m.draws[s * 5 + 1] <= m.draws[s * 5 + 3];
  CHECK(ordered);
  // median sits between the two component scales
  const double q50 = m.draw(0).quantile(0.5);
  CHECK(q50 > std::exp(-1.5));
  CHECK(q50 < std::exp(1.5));
}

TEST_CASE("mixture fit keeps components ordered and converges on bimodal data") {
  MetricDataset d;
  d.metric_id = "m";
  Rng rng(13);
  for (int i = 0; i < 400; ++i) {
    const bool left = rng.uniform() < 0.4;
    d.samples.push_back({left ? -3.0 + 0.5 * rng.normal() : 2.0 + 0.8 * rng.normal(),
                         1.0, {}});
  }
  const FittedModel m =
      fit_posterior(Family::normal_mixture2, d, quick_cfg(99, 4, 800, 500));
  CHECK(m.converged);
  bool ordered = true;
  for (std::size_t s = 0; s < m.draw_count; ++s)
    ordered = ordered && m.draws[s * 5 + 1] <= m.draws[s * 5 + 3];
  CHECK(ordered);
  // predictive mass on each side of zero roughly matches the mixture split
  double below = 0.0;
  for (std::size_t s = 0; s < m.draw_count; ++s) below += m.draw(s).cdf(0.0);
  below /= static_cast<double>(m.draw_count);
  CHECK(below == doctest::Approx(0.4).epsilon(0.25));
}

TEST_CASE("model json save/load round-trips the draws bitwise") {
  MetricDataset d;
  d.metric_id = "t_nr";
  Rng rng(31);
  for (int i = 0; i < 150; ++i)
    d.samples.push_back({-std::exp(0.4 * rng.normal()), 1.0, {}});
  SamplerConfig cfg = quick_cfg(313);
  FittedModel m = fit_posterior(Family::lognormal, d, cfg);
  m.loo = loo_elpd(m, d);

  const std::string path =
      (std::filesystem::temp_directory_path() /
       ("equibin_model_" + std::to_string(::getpid()) + ".json"))
          .string();
  save_model(m, path);
  const FittedModel back = load_model(path);
  std::filesystem::remove(path);

  CHECK(back.family == m.family);
  CHECK(back.sign == m.sign);
  CHECK(back.metric_id == m.metric_id);
  CHECK(back.draw_count == m.draw_count);
  CHECK(back.draws == m.draws);
  CHECK(back.rhat == m.rhat);
  CHECK(back.ess == m.ess);
  CHECK(back.converged == m.converged);
  REQUIRE(back.loo.has_value());
  CHECK(back.loo->elpd == m.loo->elpd);
  CHECK(back.loo->pareto_k == m.loo->pareto_k);
}

TEST_CASE("posterior calibration: hdi coverage sits in the desk-scale band") {
  const double true_mu = 1.0, true_sigma = 1.5;
  const int trials = 200;
  int cover_mu = 0, cover_sigma = 0;
  for (int t = 0; t < trials; ++t) {
    const MetricDataset d = normal_data(60, true_mu, true_sigma, 1000 + t);
    const FittedModel m =
        fit_posterior(Family::normal, d, quick_cfg(2000 + t, 2, 300, 300));
    std::vector<double> mu(m.draw_count), sigma(m.draw_count);
    for (std::size_t s = 0; s < m.draw_count; ++s) {
      mu[s] = m.draws[s * 2];
      sigma[s] = m.draws[s * 2 + 1];
    }
    const Interval hm = hdi(mu, 0.95);
    const Interval hs = hdi(sigma, 0.95);
    if (hm.lo <= true_mu && true_mu <= hm.hi) ++cover_mu;
    if (hs.lo <= true_sigma && true_sigma <= hs.hi) ++cover_sigma;
  }
  CHECK(cover_mu >= 180);
  CHECK(cover_mu <= 199);
  CHECK(cover_sigma >= 180);
  CHECK(cover_sigma <= 199);
}
