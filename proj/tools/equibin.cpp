#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "equibin/runner.hpp"

namespace {

using equibin::Family;

std::vector<Family> parse_families(const std::vector<std::string>& names) {
  std::vector<Family> out;
  for (const auto& n : names) out.push_back(equibin::family_from_string(n));
  return out;
}

// "metric=fam1+fam2" entries
std::map<std::string, std::vector<Family>> parse_metric_families(
    const std::vector<std::string>& entries) {
  std::map<std::string, std::vector<Family>> out;
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--metric-families expects metric=fam1+fam2, got '" + e + "'");
    const std::string metric = e.substr(0, eq);
    std::vector<Family> fams;
    std::string rest = e.substr(eq + 1);
    std::size_t pos = 0;
    while (pos != std::string::npos) {
      const auto plus = rest.find('+', pos);
      const std::string name = rest.substr(pos, plus == std::string::npos ? plus : plus - pos);
      if (!name.empty()) fams.push_back(equibin::family_from_string(name));
      pos = plus == std::string::npos ? plus : plus + 1;
    }
    if (fams.empty())
      throw std::runtime_error("--metric-families: no families for metric '" + metric + "'");
    out[metric] = std::move(fams);
  }
  return out;
}

struct RopeCli {
  double alpha = 0.95;
  double tol_rel = 0.10;
  double tol_abs = 0.05;
  std::size_t min_bin_samples = 40;
  std::size_t max_bins = 20;
  std::string overall_rule = "all_metrics";
  std::vector<std::string> critical;

  equibin::RopeConfig to_config() const {
    equibin::RopeConfig cfg;
    cfg.alpha = alpha;
    cfg.tol_rel = tol_rel;
    cfg.tol_abs = tol_abs;
    cfg.min_bin_samples = min_bin_samples;
    cfg.max_bins = max_bins;
    if (overall_rule == "all_metrics")
      cfg.rule = equibin::OverallRule::all_metrics;
    else if (overall_rule == "critical_subset")
      cfg.rule = equibin::OverallRule::critical_subset;
    else
      throw std::runtime_error("unknown overall rule '" + overall_rule + "'");
    cfg.critical_metrics = critical;
    return cfg;
  }
};

void add_rope_options(CLI::App* cmd, RopeCli& rope) {
  cmd->add_option("--alpha", rope.alpha, "posterior mass for the HDI");
  cmd->add_option("--tol-rel", rope.tol_rel, "baseline-bin |dP/P_ref| tolerance");
  cmd->add_option("--tol-abs", rope.tol_abs, "baseline-bin |dP| tolerance");
  cmd->add_option("--min-bin-samples", rope.min_bin_samples,
                  "minimum reference samples per bin");
  cmd->add_option("--max-bins", rope.max_bins, "bin count cap");
  cmd->add_option("--overall-rule", rope.overall_rule,
                  "all_metrics or critical_subset");
  cmd->add_option("--critical", rope.critical, "critical metrics")->delimiter(',');
}

void add_sampler_options(CLI::App* cmd, equibin::SamplerConfig& s, long long& seed) {
  cmd->add_option("--chains", s.chains, "MCMC chains");
  cmd->add_option("--warmup", s.warmup, "warmup iterations per chain");
  cmd->add_option("--draws", s.draws, "kept draws per chain");
  cmd->add_option("--seed", seed, "RNG seed (or EQUIBIN_SEED)")
      ->envname("EQUIBIN_SEED");
}

void require_seed(long long seed) {
  if (seed < 0)
    throw std::runtime_error("a seed is required (--seed or EQUIBIN_SEED)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equibin: practical equivalence testing for weighted scenario datasets"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file; CLI flags override");

  int threads = 0;
  app.add_option("--threads", threads, "cap for all parallel sections");

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit and select a distribution model");
  equibin::FitOptions fit_opt;
  std::vector<std::string> fit_families;
  std::string fit_weight_mode = "sum_to_n";
  long long fit_seed = -1;
  fit->add_option("--input", fit_opt.input, "input CSV/JSON")->required();
  fit->add_option("--metric", fit_opt.metric, "metric column")->required();
  fit->add_option("--families", fit_families, "candidate families")->delimiter(',');
  fit->add_option("--weight-mode", fit_weight_mode, "none or sum_to_n");
  add_sampler_options(fit, fit_opt.sampler, fit_seed);
  fit->add_option("--out", fit_opt.out, "model JSON path")->required();

  // ---- test ----
  auto* test = app.add_subcommand("test", "run the equivalence test");
  equibin::TestOptions test_opt;
  std::vector<std::string> test_families, metric_families;
  std::string test_weight_mode = "sum_to_n";
  RopeCli test_rope;
  long long test_seed = -1;
  test->add_option("--reference", test_opt.reference, "reference CSV/JSON")->required();
  test->add_option("--synthetic", test_opt.synthetic, "synthetic CSV/JSON")->required();
  test->add_option("--metrics", test_opt.metrics, "metric columns")
      ->delimiter(',')
      ->required();
  test->add_option("--families", test_families, "candidate families for all metrics")
      ->delimiter(',');
  test->add_option("--metric-families", metric_families,
                   "per-metric override, metric=fam1+fam2");
  test->add_option("--weight-mode", test_weight_mode, "none or sum_to_n");
  add_sampler_options(test, test_opt.sampler, test_seed);
  add_rope_options(test, test_rope);
  test->add_option("--p0", test_opt.bin_weights.p0, "baseline injury risk");
  test->add_option("--epsilon", test_opt.bin_weights.epsilon, "bin-weight epsilon");
  test->add_option("--out", test_opt.out, "report JSON path");
  test->add_option("--plot-data", test_opt.plot_dir, "directory for plot CSVs");
  test->add_option("--draw-dump", test_opt.draw_dump_dir,
                   "directory for per-draw binning dumps");

  // ---- reweight ----
  auto* reweight = app.add_subcommand("reweight", "recompute sample weights");
  equibin::ReweightOptions rw_opt;
  reweight->add_option("--mode", rw_opt.mode, "knn or scm")->required();
  reweight->add_option("--synthetic", rw_opt.synthetic, "synthetic CSV/JSON (knn)");
  reweight->add_option("--reference", rw_opt.reference, "reference CSV/JSON (knn)");
  reweight->add_option("--on", rw_opt.on, "alignment metric (knn)");
  reweight->add_option("--k", rw_opt.k, "neighbor count (knn)");
  reweight->add_option("--seeds", rw_opt.seeds, "seed table CSV/JSON (scm)");
  reweight->add_option("--crashes", rw_opt.crashes, "crash table CSV/JSON (scm)");
  reweight->add_option("--out", rw_opt.out, "output table path")->required();

  // ---- power ----
  auto* power = app.add_subcommand("power", "bootstrap power analysis");
  equibin::PowerOptions pw_opt;
  pw_opt.sampler.warmup = 500;
  pw_opt.sampler.draws = 500;
  std::vector<std::string> pw_families;
  std::string pw_weight_mode = "sum_to_n";
  RopeCli pw_rope;
  long long pw_seed = -1;
  bool pw_full = false;
  power->add_option("--parent", pw_opt.parent, "parent CSV/JSON")->required();
  power->add_option("--reference", pw_opt.reference, "reference CSV/JSON")->required();
  power->add_option("--metrics", pw_opt.metrics, "metric columns")
      ->delimiter(',')
      ->required();
  power->add_option("--families", pw_families, "candidate families")->delimiter(',');
  power->add_option("--replicate-size", pw_opt.replicate_size, "rows per replicate")
      ->required();
  power->add_option("--reps", pw_opt.reps, "bootstrap replicates");
  power->add_flag("--full", pw_full, "1000 replicates with full-length chains");
  power->add_option("--weight-mode", pw_weight_mode, "none or sum_to_n");
  add_sampler_options(power, pw_opt.sampler, pw_seed);
  add_rope_options(power, pw_rope);
  power->add_option("--p0", pw_opt.bin_weights.p0, "baseline injury risk");
  power->add_option("--epsilon", pw_opt.bin_weights.epsilon, "bin-weight epsilon");
  power->add_option("--out", pw_opt.out, "power report JSON path");

  // ---- diagnose ----
  auto* diagnose = app.add_subcommand("diagnose", "print bin contributions from a report");
  std::string diag_report, diag_metric;
  diagnose->add_option("--report", diag_report, "test report JSON")->required();
  diagnose->add_option("--metric", diag_metric, "restrict to one metric");

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) omp_set_num_threads(threads);

    if (*fit) {
      require_seed(fit_seed);
      fit_opt.sampler.seed = static_cast<std::uint64_t>(fit_seed);
      fit_opt.weight_mode = equibin::weight_mode_from_string(fit_weight_mode);
      fit_opt.families = parse_families(fit_families);
      const auto out = equibin::run_fit(fit_opt);
      std::cout << "model written to " << fit_opt.out << " (family "
                << out.report.at("family").get<std::string>() << ")\n";
      return out.exit_code;
    }
    if (*test) {
      require_seed(test_seed);
      test_opt.sampler.seed = static_cast<std::uint64_t>(test_seed);
      test_opt.weight_mode = equibin::weight_mode_from_string(test_weight_mode);
      test_opt.families = parse_families(test_families);
      test_opt.families_per_metric = parse_metric_families(metric_families);
      test_opt.rope = test_rope.to_config();
      const auto out = equibin::run_test(test_opt);
      const bool equivalent = out.report.at("overall").at("equivalent").get<bool>();
      std::cout << "overall: " << (equivalent ? "equivalent" : "not equivalent") << "\n";
      for (const auto& r : out.results)
        std::cout << "  " << r.metric_id << ": theta hdi ["
                  << r.theta_hdi.lo << ", " << r.theta_hdi.hi << "] vs [0, "
                  << r.theta_thd << "]; big_theta hdi [" << r.big_theta_hdi.lo
                  << ", " << r.big_theta_hdi.hi << "] vs [0, " << r.big_theta_thd
                  << "] -> " << (r.metric_equivalent ? "yes" : "no") << "\n";
      if (!test_opt.out.empty()) std::cout << "report written to " << test_opt.out << "\n";
      return out.exit_code;
    }
    if (*reweight) {
      const auto out = equibin::run_reweight(rw_opt);
      std::cout << out.summary.dump(2) << "\n";
      return out.exit_code;
    }
    if (*power) {
      require_seed(pw_seed);
      if (pw_full) {
        pw_opt.reps = 1000;
        pw_opt.sampler.warmup = 1000;
        pw_opt.sampler.draws = 1000;
      }
      pw_opt.sampler.seed = static_cast<std::uint64_t>(pw_seed);
      pw_opt.weight_mode = equibin::weight_mode_from_string(pw_weight_mode);
      pw_opt.families = parse_families(pw_families);
      pw_opt.rope = pw_rope.to_config();
      const auto out = equibin::run_power(pw_opt);
      for (const auto& m : out.result.metrics)
        std::cout << m.metric_id << ": theta power " << m.theta.power
                  << ", big_theta power " << m.big_theta.power << "\n";
      if (!pw_opt.out.empty()) std::cout << "report written to " << pw_opt.out << "\n";
      return out.exit_code;
    }
    if (*diagnose) {
      return equibin::cmd_diagnose(diag_report, diag_metric, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return equibin::kExitError;
  }
  return equibin::kExitError;
}
