#include "equibin/runner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "equibin/model_io.hpp"
#include "equibin/rng.hpp"

namespace equibin {

namespace {

std::uint64_t role_tag(Role role) {
  return role == Role::reference ? 0x9E1Du : 0x51A7u;
}

std::uint64_t fit_stream_tag(const std::string& metric, Family f, Role role) {
  return combine64(combine64(hash_tag(metric), static_cast<std::uint64_t>(f)),
                   role_tag(role));
}

struct CandidateReport {
  Family family;
  bool fitted = false;
  bool converged = false;
  double elpd = 0.0;
  bool loo_reliable = false;
  std::string skip_reason;
};

struct SelectionResult {
  FittedModel model;
  std::vector<CandidateReport> table;
  bool fallback = false;  // no converged candidate; best effort returned
};

// Fit every applicable candidate, attach loo, keep the selected model.  When
// nothing converges the max-elpd fit is kept and flagged so the caller can
// report a convergence warning instead of dying.
SelectionResult fit_select_report(const std::vector<Family>& families,
                                  const MetricDataset& d,
                                  const SamplerConfig& base, Role role) {
  if (families.empty())
    throw std::runtime_error("no candidate families for metric '" + d.metric_id + "'");
  SelectionResult sel;
  std::vector<FittedModel> fits;
  std::vector<std::size_t> fit_to_table;
  for (Family f : families) {
    CandidateReport row;
    row.family = f;
    SamplerConfig cfg = base;
    cfg.stream_tag = fit_stream_tag(d.metric_id, f, role);
    try {
      FittedModel m = fit_posterior(f, d, cfg);
      m.loo = loo_elpd(m, d);
      row.fitted = true;
      row.converged = m.converged;
      row.elpd = m.loo->elpd;
      row.loo_reliable = m.loo->reliable;
      fit_to_table.push_back(sel.table.size());
      fits.push_back(std::move(m));
    } catch (const std::exception& e) {
      row.skip_reason = e.what();
    }
    sel.table.push_back(std::move(row));
  }
  if (fits.empty()) {
    std::string reasons;
    for (const auto& r : sel.table)
      if (!r.skip_reason.empty())
        reasons += "\n  " + family_to_string(r.family) + ": " + r.skip_reason;
    throw std::runtime_error("no candidate family fits metric '" + d.metric_id +
                             "' (" + role_to_string(d.role) + ")" + reasons);
  }
  const bool any_converged =
      std::any_of(fits.begin(), fits.end(),
                  [](const FittedModel& m) { return m.converged; });
  std::size_t pick;
  if (any_converged) {
    pick = select_model(fits);
  } else {
    sel.fallback = true;
    pick = 0;
    for (std::size_t i = 1; i < fits.size(); ++i) {
      if (fits[i].loo->elpd > fits[pick].loo->elpd ||
          (fits[i].loo->elpd == fits[pick].loo->elpd &&
           param_count(fits[i].family) < param_count(fits[pick].family)))
        pick = i;
    }
  }
  sel.model = std::move(fits[pick]);
  return sel;
}

nlohmann::ordered_json interval_json(const Interval& i) {
  return nlohmann::ordered_json::array({i.lo, i.hi});
}

nlohmann::ordered_json sampler_json(const SamplerConfig& s) {
  return {{"chains", s.chains}, {"warmup", s.warmup}, {"draws", s.draws}};
}

nlohmann::ordered_json rope_json(const RopeConfig& r) {
  return {{"alpha", r.alpha},
          {"tol_rel", r.tol_rel},
          {"tol_abs", r.tol_abs},
          {"min_bin_samples", r.min_bin_samples},
          {"max_bins", r.max_bins},
          {"overall_rule",
           r.rule == OverallRule::all_metrics ? "all_metrics" : "critical_subset"},
          {"critical_metrics", r.critical_metrics}};
}

nlohmann::ordered_json bin_weight_json(const BinWeightConfig& b) {
  return {{"p0", b.p0}, {"epsilon", b.epsilon}, {"omega_b", b.omega_b}};
}

nlohmann::ordered_json candidate_table_json(const std::vector<CandidateReport>& table,
                                            Family selected) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table) {
    nlohmann::ordered_json row;
    row["family"] = family_to_string(r.family);
    if (r.fitted) {
      row["converged"] = r.converged;
      row["elpd"] = r.elpd;
      row["loo_reliable"] = r.loo_reliable;
      row["selected"] = r.family == selected;
    } else {
      row["skipped"] = r.skip_reason;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json model_summary_json(const FittedModel& m,
                                          const std::vector<CandidateReport>& table) {
  nlohmann::ordered_json j;
  j["family"] = family_to_string(m.family);
  j["sign"] = m.sign;
  j["converged"] = m.converged;
  double rhat_max = 0.0, ess_min = std::numeric_limits<double>::infinity();
  for (double r : m.rhat) rhat_max = std::max(rhat_max, r);
  for (double e : m.ess) ess_min = std::min(ess_min, e);
  j["rhat_max"] = rhat_max;
  j["ess_min"] = ess_min;
  j["accept_rate"] = m.accept_rate;
  if (m.loo) {
    j["elpd"] = m.loo->elpd;
    j["loo_reliable"] = m.loo->reliable;
  }
  j["candidates"] = candidate_table_json(table, m.family);
  return j;
}

std::vector<Family> candidates_for(const TestOptions& opt, const std::string& metric) {
  const auto it = opt.families_per_metric.find(metric);
  if (it != opt.families_per_metric.end()) return it->second;
  if (!opt.families.empty()) return opt.families;
  return default_candidate_families();
}

nlohmann::ordered_json families_echo(const TestOptions& opt) {
  nlohmann::ordered_json j;
  for (const auto& m : opt.metrics) {
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (Family f : candidates_for(opt, m)) names.push_back(family_to_string(f));
    j[m] = std::move(names);
  }
  return j;
}

void write_csv_line(std::ofstream& out, std::span<const double> vals) {
  for (std::size_t i = 0; i < vals.size(); ++i)
    out << (i ? "," : "") << format_double(vals[i]);
  out << "\n";
}

void write_plot_data(const std::string& dir, const std::string& metric,
                     const FittedModel& ref_model, const FittedModel& syn_model,
                     const EquivalenceResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  // posterior CDF curves on a fixed quantile grid
  const int grid = 199;
  const std::size_t s_count = std::min(ref_model.draw_count, syn_model.draw_count);
  std::vector<double> rows(grid * 7);
#pragma omp parallel for schedule(static)
  for (int g = 0; g < grid; ++g) {
    const double p = static_cast<double>(g + 1) / (grid + 1);
    std::vector<double> qr(s_count), qs(s_count);
    for (std::size_t s = 0; s < s_count; ++s) {
      qr[s] = ref_model.draw(s).quantile(p);
      qs[s] = syn_model.draw(s).quantile(p);
    }
    double mr = 0.0, ms = 0.0;
    for (std::size_t s = 0; s < s_count; ++s) {
      mr += qr[s];
      ms += qs[s];
    }
    mr /= static_cast<double>(s_count);
    ms /= static_cast<double>(s_count);
    const Interval ir = hdi(qr, 0.95);
    const Interval is = hdi(qs, 0.95);
    double* row = rows.data() + static_cast<std::size_t>(g) * 7;
    row[0] = p;
    row[1] = mr;
    row[2] = ir.lo;
    row[3] = ir.hi;
    row[4] = ms;
    row[5] = is.lo;
    row[6] = is.hi;
  }
  std::ofstream cdf(fs::path(dir) / ("cdf_" + metric + ".csv"));
  cdf << "p,ref_mean,ref_lo,ref_hi,syn_mean,syn_lo,syn_hi\n";
  for (int g = 0; g < grid; ++g)
    write_csv_line(cdf, std::span<const double>(rows.data() + g * 7, 7));

  std::ofstream bins(fs::path(dir) / ("bins_" + metric + ".csv"));
  bins << "bin,rel_mean,rel_lo,rel_hi,abs_mean,abs_lo,abs_hi\n";
  for (const auto& c : res.bin_contributions) {
    bins << c.bin << ",";
    write_csv_line(bins, std::array<double, 6>{c.rel_mean, c.rel_hdi.lo, c.rel_hdi.hi,
                                               c.abs_mean, c.abs_hdi.lo, c.abs_hdi.hi});
  }
}

void write_draw_dump(const std::string& dir, const std::string& metric,
                     const FittedModel& ref_model, const FittedModel& syn_model,
                     const MetricDataset& ref_data, int bins,
                     const BinWeightConfig& bw) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / ("draws_" + metric + ".csv"));
  out << "draw,bin,lower,upper,p_ref,p_syn,delta_p,omega\n";
  const std::size_t s_count = std::min(ref_model.draw_count, syn_model.draw_count);
  const SortedOutcomeData data = prepare_outcome_data(ref_data);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < s_count; ++s) {
    const BinPartition part =
        build_partition(ref_model.draw(s), syn_model.draw(s), data, bins, bw);
    for (int i = 0; i < bins; ++i) {
      const double lower = (i == 0) ? -inf : part.boundaries[i - 1];
      const double upper = (i == bins - 1) ? inf : part.boundaries[i];
      out << s << "," << i + 1 << "," << format_double(lower) << ","
          << format_double(upper) << "," << format_double(part.p_ref[i]) << ","
          << format_double(part.p_syn[i]) << ","
          << format_double(part.p_syn[i] - part.p_ref[i]) << ","
          << format_double(part.omega[i]) << "\n";
    }
  }
}

}  // namespace

std::vector<Family> default_candidate_families() {
  return {Family::normal, Family::lognormal, Family::gamma};
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

FitOutcome run_fit(const FitOptions& opt) {
  if (opt.metric.empty()) throw std::runtime_error("fit: no metric given");
  const std::vector<Family> families =
      opt.families.empty() ? default_candidate_families() : opt.families;

  std::vector<std::string> warnings;
  const ScenarioTable table = load_table(opt.input);
  MetricDataset data = extract_metric(table, opt.metric, Role::reference, {}, &warnings);
  data = normalize_weights(data, opt.weight_mode);

  const SelectionResult sel =
      fit_select_report(families, data, opt.sampler, Role::reference);
  if (sel.fallback)
    warnings.push_back("no candidate converged; best-effort model returned");

  nlohmann::ordered_json j = model_to_json(sel.model);
  nlohmann::ordered_json config;
  config["input"] = opt.input;
  config["metric"] = opt.metric;
  nlohmann::ordered_json fam = nlohmann::ordered_json::array();
  for (Family f : families) fam.push_back(family_to_string(f));
  config["families"] = std::move(fam);
  config["weight_mode"] = weight_mode_to_string(opt.weight_mode);
  config["sampler"] = sampler_json(opt.sampler);
  config["seed"] = opt.sampler.seed;
  j["config"] = std::move(config);
  j["candidates"] = candidate_table_json(sel.table, sel.model.family);
  j["warnings"] = warnings;

  FitOutcome out;
  out.exit_code = sel.model.converged ? kExitOk : kExitConvergenceWarning;
  out.report = std::move(j);
  if (!opt.out.empty()) write_json_file(out.report, opt.out);
  return out;
}

TestOutcome run_test(const TestOptions& opt) {
  if (opt.metrics.empty()) throw std::runtime_error("test: no metrics given");

  std::vector<std::string> warnings;
  const ScenarioTable ref_table = load_table(opt.reference);
  const ScenarioTable syn_table = load_table(opt.synthetic);

  TestOutcome out;
  nlohmann::ordered_json& report = out.report;
  report["tool"] = "equibin";
  report["report"] = "test";
  {
    nlohmann::ordered_json config;
    config["seed"] = opt.sampler.seed;
    config["reference"] = opt.reference;
    config["synthetic"] = opt.synthetic;
    config["metrics"] = opt.metrics;
    config["candidates"] = families_echo(opt);
    config["weight_mode"] = weight_mode_to_string(opt.weight_mode);
    config["sampler"] = sampler_json(opt.sampler);
    config["rope"] = rope_json(opt.rope);
    config["bin_weights"] = bin_weight_json(opt.bin_weights);
    report["config"] = std::move(config);
  }

  bool convergence_warning = false;
  nlohmann::ordered_json metric_reports = nlohmann::ordered_json::array();

  for (const auto& metric : opt.metrics) {
    MetricDataset ref_data =
        extract_metric(ref_table, metric, Role::reference, {}, &warnings);
    MetricDataset syn_data =
        extract_metric(syn_table, metric, Role::synthetic, {}, &warnings);
    if (!ref_data.has_outcomes())
      throw std::runtime_error(
          "reference data for metric '" + metric +
          "' must include the resim_outcome column (bin weights need it)");
    ref_data = normalize_weights(ref_data, opt.weight_mode);
    syn_data = normalize_weights(syn_data, opt.weight_mode);

    const std::vector<Family> families = candidates_for(opt, metric);
    const SelectionResult ref_sel =
        fit_select_report(families, ref_data, opt.sampler, Role::reference);
    const SelectionResult syn_sel =
        fit_select_report(families, syn_data, opt.sampler, Role::synthetic);
    if (ref_sel.fallback || syn_sel.fallback) {
      convergence_warning = true;
      warnings.push_back("metric '" + metric +
                         "': no converged candidate; verdict uses a best-effort fit");
    }

    EquivalenceResult res = run_metric_test(ref_sel.model, syn_sel.model, ref_data,
                                            opt.rope, opt.bin_weights);
    for (const auto& w : res.warnings) warnings.push_back("metric '" + metric + "': " + w);

    nlohmann::ordered_json mj;
    mj["metric"] = metric;
    mj["n_reference"] = ref_data.n();
    mj["n_synthetic"] = syn_data.n();
    mj["bins"] = res.bins;
    mj["draw_pairs"] = res.draw_pairs;
    mj["reference_model"] = model_summary_json(ref_sel.model, ref_sel.table);
    mj["synthetic_model"] = model_summary_json(syn_sel.model, syn_sel.table);
    {
      nlohmann::ordered_json stats;
      stats["theta"] = {{"rope", nlohmann::ordered_json::array({0.0, res.theta_thd})},
                        {"hdi", interval_json(res.theta_hdi)},
                        {"pass", res.theta_pass}};
      stats["big_theta"] = {{"rope", nlohmann::ordered_json::array({0.0, res.big_theta_thd})},
                            {"hdi", interval_json(res.big_theta_hdi)},
                            {"pass", res.big_theta_pass}};
      mj["statistics"] = std::move(stats);
    }
    mj["equivalent"] = res.metric_equivalent;
    {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& c : res.bin_contributions) {
        rows.push_back({{"bin", c.bin},
                        {"rel_mean", c.rel_mean},
                        {"rel_hdi", interval_json(c.rel_hdi)},
                        {"abs_mean", c.abs_mean},
                        {"abs_hdi", interval_json(c.abs_hdi)}});
      }
      mj["bin_contributions"] = std::move(rows);
    }
    metric_reports.push_back(std::move(mj));

    if (!opt.plot_dir.empty())
      write_plot_data(opt.plot_dir, metric, ref_sel.model, syn_sel.model, res);
    if (!opt.draw_dump_dir.empty())
      write_draw_dump(opt.draw_dump_dir, metric, ref_sel.model, syn_sel.model,
                      ref_data, res.bins, opt.bin_weights);
    out.results.push_back(std::move(res));
  }

  report["metrics"] = std::move(metric_reports);
  const VerdictReport verdict = overall_verdict(out.results, opt.rope);
  report["overall"] = {
      {"rule", opt.rope.rule == OverallRule::all_metrics ? "all_metrics"
                                                         : "critical_subset"},
      {"equivalent", verdict.equivalent},
      {"notes", verdict.notes}};
  report["warnings"] = warnings;

  if (!verdict.equivalent)
    out.exit_code = kExitNonEquivalent;
  else if (convergence_warning)
    out.exit_code = kExitConvergenceWarning;
  else
    out.exit_code = kExitOk;
  report["exit_code"] = out.exit_code;

  if (!opt.out.empty()) write_json_file(report, opt.out);
  return out;
}

PowerOutcome run_power(const PowerOptions& opt) {
  if (opt.metrics.empty()) throw std::runtime_error("power: no metrics given");
  if (opt.replicate_size < 2) throw std::runtime_error("power: replicate size too small");

  std::vector<std::string> warnings;
  std::vector<MetricDataset> parent =
      load_datasets(opt.parent, opt.metrics, Role::reference, {}, &warnings);
  std::vector<MetricDataset> reference =
      load_datasets(opt.reference, opt.metrics, Role::reference, {}, &warnings);
  for (auto& r : reference) r = normalize_weights(r, opt.weight_mode);

  PowerConfig cfg;
  cfg.replicate_size = opt.replicate_size;
  cfg.reps = opt.reps;
  cfg.candidates = opt.families.empty() ? default_candidate_families() : opt.families;
  cfg.sampler = opt.sampler;
  cfg.rope = opt.rope;
  cfg.bin_weights = opt.bin_weights;
  cfg.seed = opt.sampler.seed;

  PowerOutcome out;
  out.result = bootstrap_power(parent, reference, cfg);

  nlohmann::ordered_json& report = out.report;
  report["tool"] = "equibin";
  report["report"] = "power";
  {
    nlohmann::ordered_json config;
    config["seed"] = cfg.seed;
    config["parent"] = opt.parent;
    config["reference"] = opt.reference;
    config["metrics"] = opt.metrics;
    nlohmann::ordered_json fam = nlohmann::ordered_json::array();
    for (Family f : cfg.candidates) fam.push_back(family_to_string(f));
    config["candidates"] = std::move(fam);
    config["replicate_size"] = cfg.replicate_size;
    config["replicates"] = cfg.reps;
    config["weight_mode"] = weight_mode_to_string(opt.weight_mode);
    config["sampler"] = sampler_json(cfg.sampler);
    config["rope"] = rope_json(cfg.rope);
    config["bin_weights"] = bin_weight_json(cfg.bin_weights);
    report["config"] = std::move(config);
  }
  report["replicates"] = out.result.reps;
  report["nonconverged_replicates"] = out.result.nonconverged_replicates;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& m : out.result.metrics) {
    nlohmann::ordered_json row;
    row["metric"] = m.metric_id;
    const std::array<std::pair<const char*, const PowerCell*>, 3> cells = {
        {{"theta", &m.theta}, {"big_theta", &m.big_theta}, {"both", &m.both}}};
    for (const auto& [name, cell] : cells) {
      row[name] = {{"successes", cell->successes},
                   {"power", cell->power},
                   {"wilson", interval_json(cell->wilson)}};
    }
    rows.push_back(std::move(row));
  }
  report["metrics"] = std::move(rows);
  report["warnings"] = warnings;

  out.exit_code =
      out.result.nonconverged_replicates > 0 ? kExitConvergenceWarning : kExitOk;
  report["exit_code"] = out.exit_code;
  if (!opt.out.empty()) write_json_file(report, opt.out);
  return out;
}

ReweightOutcome run_reweight(const ReweightOptions& opt) {
  ReweightOutcome out;
  nlohmann::ordered_json& j = out.summary;
  j["tool"] = "equibin";
  j["report"] = "reweight";
  j["mode"] = opt.mode;
  if (opt.out.empty()) throw std::runtime_error("reweight: output path required");

  if (opt.mode == "knn") {
    if (opt.on.empty()) throw std::runtime_error("reweight knn: --on metric required");
    ScenarioTable syn_table = load_table(opt.synthetic);
    const ScenarioTable ref_table = load_table(opt.reference);
    const MetricDataset syn = extract_metric(syn_table, opt.on, Role::synthetic);
    const MetricDataset ref = extract_metric(ref_table, opt.on, Role::reference);
    const std::vector<double> w = knn_reweight(syn, ref, opt.k);
    syn_table.set_numeric_column("weight", w);
    write_table(syn_table, opt.out);
    double sum = 0.0;
    for (double v : w) sum += v;
    j["on"] = opt.on;
    j["k"] = opt.k;
    j["rows"] = w.size();
    j["weight_sum"] = sum;
    j["output"] = opt.out;
    return out;
  }

  if (opt.mode == "scm") {
    const ScenarioTable seed_table = load_table(opt.seeds);
    const int sid = seed_table.text_index("seed_id");
    if (sid < 0) throw std::runtime_error("seeds file needs a seed_id column");
    const int wcol = seed_table.numeric_index("weight");
    const int nsim_col = seed_table.numeric_index("n_sim");
    const int ncrash_col = seed_table.numeric_index("n_crash");
    if (wcol < 0 || nsim_col < 0 || ncrash_col < 0)
      throw std::runtime_error("seeds file needs weight, n_sim and n_crash columns");
    std::vector<ScmSeedRecord> seeds;
    seeds.reserve(seed_table.row_count());
    for (std::size_t r = 0; r < seed_table.row_count(); ++r) {
      ScmSeedRecord rec;
      rec.seed_id = seed_table.text_rows[r][sid];
      rec.omega_seed = seed_table.numeric_rows[r][wcol];
      const double ns = seed_table.numeric_rows[r][nsim_col];
      const double nc = seed_table.numeric_rows[r][ncrash_col];
      if (ns != std::floor(ns) || nc != std::floor(nc))
        throw std::runtime_error("row " + std::to_string(r + 2) +
                                 ": n_sim and n_crash must be integers");
      rec.n_sim = static_cast<std::int64_t>(ns);
      rec.n_crash = static_cast<std::int64_t>(nc);
      seeds.push_back(std::move(rec));
    }

    ScenarioTable crash_table = load_table(opt.crashes);
    const int cid = crash_table.text_index("seed_id");
    if (cid < 0) throw std::runtime_error("crashes file needs a seed_id column");
    const std::size_t total = crash_table.row_count();
    const std::map<std::string, double> weights = scm_resim_weights(seeds, total);

    // validate per-seed crash counts against the seed table
    std::map<std::string, std::int64_t> counts;
    for (std::size_t r = 0; r < total; ++r) ++counts[crash_table.text_rows[r][cid]];
    for (const auto& s : seeds) {
      const auto it = counts.find(s.seed_id);
      const std::int64_t seen = it == counts.end() ? 0 : it->second;
      if (seen != s.n_crash)
        throw std::runtime_error("seed '" + s.seed_id + "': crashes file has " +
                                 std::to_string(seen) + " rows but n_crash is " +
                                 std::to_string(s.n_crash));
      if (it != counts.end()) counts.erase(it);
    }
    if (!counts.empty())
      throw std::runtime_error("crashes file references unknown seed '" +
                               counts.begin()->first + "'");

    std::vector<double> w(total);
    for (std::size_t r = 0; r < total; ++r)
      w[r] = weights.at(crash_table.text_rows[r][cid]);
    crash_table.set_numeric_column("weight", w);
    write_table(crash_table, opt.out);
    double sum = 0.0;
    for (double v : w) sum += v;
    j["crashes"] = total;
    j["weight_sum"] = sum;
    j["output"] = opt.out;
    return out;
  }

  throw std::runtime_error("reweight: unknown mode '" + opt.mode + "' (knn, scm)");
}

int cmd_diagnose(const std::string& report_path, const std::string& metric,
                 std::ostream& os) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open '" + report_path + "'");
  nlohmann::ordered_json report;
  in >> report;
  if (!report.contains("metrics"))
    throw std::runtime_error("'" + report_path + "' is not a test report");
  bool found = false;
  for (const auto& mj : report.at("metrics")) {
    const std::string name = mj.at("metric").get<std::string>();
    if (!metric.empty() && name != metric) continue;
    found = true;
    os << "metric " << name << " (bins sorted by weighted relative contribution)\n";
    os << "bin,rel_mean,rel_lo,rel_hi,abs_mean,abs_lo,abs_hi\n";
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& c : mj.at("bin_contributions")) rows.push_back(c);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const nlohmann::ordered_json& a, const nlohmann::ordered_json& b) {
                       return a.at("rel_mean").get<double>() >
                              b.at("rel_mean").get<double>();
                     });
    for (const auto& c : rows) {
      os << c.at("bin") << "," << format_double(c.at("rel_mean").get<double>()) << ","
         << format_double(c.at("rel_hdi")[0].get<double>()) << ","
         << format_double(c.at("rel_hdi")[1].get<double>()) << ","
         << format_double(c.at("abs_mean").get<double>()) << ","
         << format_double(c.at("abs_hdi")[0].get<double>()) << ","
         << format_double(c.at("abs_hdi")[1].get<double>()) << "\n";
    }
  }
  if (!found)
    throw std::runtime_error(metric.empty() ? "report has no metrics"
                                            : "metric '" + metric + "' not in report");
  return kExitOk;
}

}  // namespace equibin
