#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "equibin/equivtest.hpp"
#include "equibin/power.hpp"
#include "equibin/reweight.hpp"

namespace equibin {

// stable CLI exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConvergenceWarning = 2;
inline constexpr int kExitNonEquivalent = 3;

std::vector<Family> default_candidate_families();

struct FitOptions {
  std::string input;
  std::string metric;
  std::vector<Family> families;
  WeightMode weight_mode = WeightMode::sum_to_n;
  SamplerConfig sampler;
  std::string out;  // model JSON path; empty writes nothing
};

struct FitOutcome {
  int exit_code = kExitOk;
  nlohmann::ordered_json report;  // the model file contents
};

FitOutcome run_fit(const FitOptions& opt);

struct TestOptions {
  std::string reference;
  std::string synthetic;
  std::vector<std::string> metrics;
  std::vector<Family> families;  // candidate list applied to every metric
  std::map<std::string, std::vector<Family>> families_per_metric;  // overrides
  WeightMode weight_mode = WeightMode::sum_to_n;
  SamplerConfig sampler;
  RopeConfig rope;
  BinWeightConfig bin_weights;
  std::string out;
  std::string plot_dir;       // CDF grids + bin contribution CSVs
  std::string draw_dump_dir;  // per-draw binning dump
};

struct TestOutcome {
  int exit_code = kExitOk;
  nlohmann::ordered_json report;
  std::vector<EquivalenceResult> results;
};

TestOutcome run_test(const TestOptions& opt);

struct PowerOptions {
  std::string parent;
  std::string reference;
  std::vector<std::string> metrics;
  std::vector<Family> families;
  std::size_t replicate_size = 0;
  std::size_t reps = 50;
  WeightMode weight_mode = WeightMode::sum_to_n;  // reference fitting
  SamplerConfig sampler;                          // power default: 4 x (500+500)
  RopeConfig rope;
  BinWeightConfig bin_weights;
  std::string out;
};

struct PowerOutcome {
  int exit_code = kExitOk;
  nlohmann::ordered_json report;
  PowerResult result;
};

PowerOutcome run_power(const PowerOptions& opt);

struct ReweightOptions {
  std::string mode;  // "knn" or "scm"
  // knn
  std::string synthetic;
  std::string reference;
  std::string on;  // alignment metric
  std::size_t k = 20;
  // scm
  std::string seeds;
  std::string crashes;
  std::string out;
};

struct ReweightOutcome {
  int exit_code = kExitOk;
  nlohmann::ordered_json summary;
};

ReweightOutcome run_reweight(const ReweightOptions& opt);

int cmd_diagnose(const std::string& report_path, const std::string& metric,
                 std::ostream& out);

void write_json_file(const nlohmann::ordered_json& j, const std::string& path);

}  // namespace equibin
