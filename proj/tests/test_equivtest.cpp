#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "equibin/equivtest.hpp"
#include "equibin/rng.hpp"

using namespace equibin;

namespace {

// hand-built posterior: normal draws jittered around (mu, sigma)
FittedModel toy_model(std::size_t draws, double mu, double sigma, double spread,
                      std::uint64_t seed) {
  FittedModel m;
  m.metric_id = "m";
  m.family = Family::normal;
  m.sign = 1;
  m.draw_count = draws;
  m.parameter_names = param_names(Family::normal);
  Rng rng(seed);
  for (std::size_t s = 0; s < draws; ++s) {
    m.draws.push_back(mu + spread * rng.normal());
    m.draws.push_back(sigma * std::exp(0.3 * spread * rng.normal()));
  }
  m.rhat = {1.0, 1.0};
  m.ess = {double(draws), double(draws)};
  m.converged = true;
  return m;
}

MetricDataset toy_reference(std::size_t n, double outcome, std::uint64_t seed) {
  MetricDataset d;
  d.metric_id = "m";
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    d.samples.push_back({rng.normal(), 1.0, outcome});
  return d;
}

const std::vector<double> kFig3Ref{0.2, 0.2, 0.2, 0.2, 0.2};
const std::vector<double> kFig3Syn{0.22, 0.18, 0.16, 0.18, 0.26};
const std::vector<double> kFig3Omega{2.0, 0.2, 0.2, 0.5, 0.8};

}  // namespace

TEST_CASE("worked binning example: theta picks the worst weighted bin") {
  CHECK(theta_statistic(kFig3Ref, kFig3Syn, kFig3Omega) ==
        doctest::Approx(0.24).epsilon(1e-12));
  CHECK(big_theta_statistic(kFig3Ref, kFig3Syn, kFig3Omega) ==
        doctest::Approx(0.110).epsilon(1e-12));
}

TEST_CASE("identical proportions give zero statistics") {
  CHECK(theta_statistic(kFig3Ref, kFig3Ref, kFig3Omega) == 0.0);
  CHECK(big_theta_statistic(kFig3Ref, kFig3Ref, kFig3Omega) == 0.0);
  const std::vector<double> one{1.0};
  CHECK(theta_statistic(one, one, std::vector<double>{7.0}) == 0.0);
}

TEST_CASE("statistic preconditions") {
  const std::vector<double> zero_ref{0.0, 1.0};
  CHECK_THROWS(theta_statistic(zero_ref, kFig3Ref, kFig3Omega));
  CHECK_THROWS(theta_statistic(kFig3Ref, kFig3Syn, std::vector<double>{1.0}));
  const std::vector<double> zeros(5, 0.0);
  CHECK(big_theta_statistic(kFig3Ref, kFig3Syn, zeros) == 0.0);
}

TEST_CASE("statistics scale linearly in the bin weights") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> syn(5), omega(5), scaled(5);
    double sum = 0.0;
    for (double& v : syn) sum += (v = rng.uniform());
    for (double& v : syn) v /= sum;
    const double c = 0.1 + 5.0 * rng.uniform();
    for (int i = 0; i < 5; ++i) {
      omega[i] = rng.uniform() * 3.0;
      scaled[i] = c * omega[i];
    }
    CHECK(theta_statistic(kFig3Ref, syn, scaled) ==
          doctest::Approx(c * theta_statistic(kFig3Ref, syn, omega)).epsilon(1e-12));
    CHECK(big_theta_statistic(kFig3Ref, syn, scaled) ==
          doctest::Approx(c * big_theta_statistic(kFig3Ref, syn, omega)).epsilon(1e-12));
  }
}

TEST_CASE("statistics are zero exactly when every weighted deviation is zero") {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> syn(5), omega(5);
    double sum = 0.0;
    for (double& v : syn) sum += (v = 0.01 + rng.uniform());
    for (double& v : syn) v /= sum;
    for (double& v : omega) v = (rng.uniform() < 0.3) ? 0.0 : rng.uniform();
    bool all_zero = true;
    for (int i = 0; i < 5; ++i)
      all_zero = all_zero && (syn[i] - 0.2) * omega[i] == 0.0;
    const double theta = theta_statistic(kFig3Ref, syn, omega);
    const double big = big_theta_statistic(kFig3Ref, syn, omega);
    CHECK((theta == 0.0) == all_zero);
    CHECK((big == 0.0) == all_zero);
  }
}

TEST_CASE("theta bounded by the sum of weighted relative deviations") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> syn(5), omega(5);
    double sum = 0.0;
    for (double& v : syn) sum += (v = 0.01 + rng.uniform());
    for (double& v : syn) v /= sum;
    for (double& v : omega) v = 2.0 * rng.uniform();
    double rel_sum = 0.0;
    for (int i = 0; i < 5; ++i)
      rel_sum += std::abs((syn[i] - 0.2) / 0.2) * omega[i];
    CHECK(theta_statistic(kFig3Ref, syn, omega) <= rel_sum + 1e-12);
  }
}

TEST_CASE("rope thresholds and the per-bin ceiling") {
  RopeConfig cfg;
  const auto [t1, t2] = rope_thresholds(cfg);
  CHECK(t1 == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(t2 == doctest::Approx(0.05).epsilon(1e-12));
  cfg.tol_rel = 0.20;
  CHECK(rope_thresholds(cfg).first == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(per_bin_relative_ceiling(0.10, 1.2) == doctest::Approx(0.083).epsilon(1e-2));
  CHECK_THROWS(per_bin_relative_ceiling(0.10, 0.0));
  cfg.alpha = 1.5;
  CHECK_THROWS(rope_thresholds(cfg));
}

TEST_CASE("self-comparison of the very same draws is exactly zero and passes") {
  const FittedModel m = toy_model(1200, 0.0, 1.0, 0.05, 21);
  const MetricDataset ref = toy_reference(200, 0.0025, 22);
  RopeConfig cfg;
  const EquivalenceResult r = run_metric_test(m, m, ref, cfg, BinWeightConfig{});
  for (double v : r.theta_samples) CHECK(v == 0.0);
  for (double v : r.big_theta_samples) CHECK(v == 0.0);
  CHECK(r.theta_pass);
  CHECK(r.big_theta_pass);
  CHECK(r.metric_equivalent);
  CHECK(r.bins == 5);
}

TEST_CASE("the per-draw kernel agrees bitwise with the statistic functions") {
  const FittedModel ref_m = toy_model(1100, 0.0, 1.0, 0.08, 25);
  const FittedModel syn_m = toy_model(1100, 0.2, 1.1, 0.06, 26);
  const MetricDataset ref = toy_reference(170, 0.01, 27);
  const BinWeightConfig bw;
  const DrawStatistics stats = compute_draw_statistics_serial(ref_m, syn_m, ref, 4, bw);
  const SortedOutcomeData data = prepare_outcome_data(ref);
  for (std::size_t s = 0; s < stats.pairs; s += 97) {
    const BinPartition part =
        build_partition(ref_m.draw(s), syn_m.draw(s), data, 4, bw);
    CHECK(stats.theta[s] == theta_statistic(part.p_ref, part.p_syn, part.omega));
    CHECK(stats.big_theta[s] ==
          big_theta_statistic(part.p_ref, part.p_syn, part.omega));
  }
}

TEST_CASE("serial and parallel draw statistics agree bitwise") {
  const FittedModel ref_m = toy_model(2000, 0.0, 1.0, 0.08, 31);
  const FittedModel syn_m = toy_model(2000, 0.3, 1.1, 0.06, 32);
  const MetricDataset ref = toy_reference(160, 0.01, 33);
  const DrawStatistics serial =
      compute_draw_statistics_serial(ref_m, syn_m, ref, 4, BinWeightConfig{});
  const DrawStatistics parallel =
      compute_draw_statistics(ref_m, syn_m, ref, 4, BinWeightConfig{}, true);
  CHECK(serial.theta == parallel.theta);
  CHECK(serial.big_theta == parallel.big_theta);
  CHECK(serial.rel_contrib == parallel.rel_contrib);
  CHECK(serial.abs_contrib == parallel.abs_contrib);
}

TEST_CASE("draw-count mismatch truncates with a warning") {
  const FittedModel ref_m = toy_model(1500, 0.0, 1.0, 0.05, 41);
  const FittedModel syn_m = toy_model(1100, 0.0, 1.0, 0.05, 42);
  const MetricDataset ref = toy_reference(120, 0.0, 43);
  const EquivalenceResult r =
      run_metric_test(ref_m, syn_m, ref, RopeConfig{}, BinWeightConfig{});
  CHECK(r.draw_pairs == 1100);
  REQUIRE(!r.warnings.empty());
  CHECK(r.warnings.front().find("mismatch") != std::string::npos);
}

TEST_CASE("verdicts are invariant to draw-pair order") {
  const FittedModel ref_m = toy_model(1400, 0.0, 1.0, 0.07, 51);
  const FittedModel syn_m = toy_model(1400, 0.15, 1.0, 0.07, 52);
  const MetricDataset ref = toy_reference(150, 0.0025, 53);

  // permute both models with the same permutation: the set of pairs is equal
  FittedModel ref_p = ref_m;
  FittedModel syn_p = syn_m;
  Rng rng(54);
  std::vector<std::size_t> perm(ref_m.draw_count);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(perm);
  const int dim = ref_m.dim();
  for (std::size_t s = 0; s < perm.size(); ++s)
    for (int p = 0; p < dim; ++p) {
      ref_p.draws[s * dim + p] = ref_m.draws[perm[s] * dim + p];
      syn_p.draws[s * dim + p] = syn_m.draws[perm[s] * dim + p];
    }

  const EquivalenceResult a =
      run_metric_test(ref_m, syn_m, ref, RopeConfig{}, BinWeightConfig{});
  const EquivalenceResult b =
      run_metric_test(ref_p, syn_p, ref, RopeConfig{}, BinWeightConfig{});
  CHECK(a.theta_hdi.lo == b.theta_hdi.lo);
  CHECK(a.theta_hdi.hi == b.theta_hdi.hi);
  CHECK(a.big_theta_hdi.lo == b.big_theta_hdi.lo);
  CHECK(a.big_theta_hdi.hi == b.big_theta_hdi.hi);
  CHECK(a.metric_equivalent == b.metric_equivalent);
}

TEST_CASE("enlarging the rope never flips pass to fail") {
  const FittedModel ref_m = toy_model(1200, 0.0, 1.0, 0.08, 61);
  const FittedModel syn_m = toy_model(1200, 0.25, 1.0, 0.08, 62);
  const MetricDataset ref = toy_reference(140, 0.0025, 63);
  RopeConfig small;
  small.tol_rel = 0.05;
  small.tol_abs = 0.02;
  RopeConfig large;
  large.tol_rel = 0.5;
  large.tol_abs = 0.3;
  const auto rs = run_metric_test(ref_m, syn_m, ref, small, BinWeightConfig{});
  const auto rl = run_metric_test(ref_m, syn_m, ref, large, BinWeightConfig{});
  if (rs.theta_pass) CHECK(rl.theta_pass);
  if (rs.big_theta_pass) CHECK(rl.big_theta_pass);
}

TEST_CASE("overall verdict rules") {
  EquivalenceResult pass_a, fail_b;
  pass_a.metric_id = "a";
  pass_a.metric_equivalent = true;
  fail_b.metric_id = "b";
  fail_b.metric_equivalent = false;
  const std::vector<EquivalenceResult> results{pass_a, fail_b};

  RopeConfig all;
  CHECK_FALSE(overall_verdict(results, all).equivalent);
  const std::vector<EquivalenceResult> ok{pass_a, pass_a};
  CHECK(overall_verdict(ok, all).equivalent);

  RopeConfig critical;
  critical.rule = OverallRule::critical_subset;
  critical.critical_metrics = {"a"};
  const auto v = overall_verdict(results, critical);
  CHECK(v.equivalent);  // only the critical metric blocks
  REQUIRE(!v.notes.empty());
  CHECK(v.notes.front().find("non-blocking") != std::string::npos);

  critical.critical_metrics = {"b"};
  CHECK_FALSE(overall_verdict(results, critical).equivalent);

  critical.critical_metrics = {};
  CHECK_THROWS(overall_verdict(results, critical));
  critical.critical_metrics = {"absent"};
  CHECK_THROWS(overall_verdict(results, critical));
}

TEST_CASE("diagnose sorts by mean weighted relative contribution") {
  const FittedModel ref_m = toy_model(1600, 0.0, 1.0, 0.08, 71);
  const FittedModel syn_m = toy_model(1600, 0.4, 1.2, 0.08, 72);
  const MetricDataset ref = toy_reference(200, 0.005, 73);
  const EquivalenceResult r =
      run_metric_test(ref_m, syn_m, ref, RopeConfig{}, BinWeightConfig{});
  const auto sorted = diagnose(r);
  REQUIRE(sorted.size() == r.bin_contributions.size());
  // brute-force: the first row is the max of the per-bin means
  double max_mean = 0.0;
  for (const auto& c : r.bin_contributions) max_mean = std::max(max_mean, c.rel_mean);
  CHECK(sorted.front().rel_mean == max_mean);
  for (std::size_t i = 1; i < sorted.size(); ++i)
    CHECK(sorted[i - 1].rel_mean >= sorted[i].rel_mean);

  // identical models contribute nothing
  const EquivalenceResult zero =
      run_metric_test(ref_m, ref_m, ref, RopeConfig{}, BinWeightConfig{});
  for (const auto& c : diagnose(zero)) {
    CHECK(c.rel_mean == 0.0);
    CHECK(c.abs_mean == 0.0);
  }
}
