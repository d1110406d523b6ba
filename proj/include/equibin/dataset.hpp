#pragma once

#include <optional>
#include <string>
#include <vector>

namespace equibin {

struct WeightedSample {
  double value = 0.0;
  double weight = 1.0;
  std::optional<double> outcome;  // re-simulated injury risk in [0,1]
};

enum class Role { reference, synthetic };

std::string role_to_string(Role r);

struct MetricDataset {
  std::string metric_id;
  Role role = Role::reference;
  std::vector<WeightedSample> samples;

  std::size_t n() const { return samples.size(); }
  double weight_sum() const;
  bool has_outcomes() const;
  void validate() const;  // throws on invariant violation
};

enum class WeightMode { none, sum_to_n };

WeightMode weight_mode_from_string(const std::string& s);
std::string weight_mode_to_string(WeightMode m);

MetricDataset normalize_weights(const MetricDataset& d, WeightMode mode);

// Row-oriented scenario table.  CSV and JSON mirrors share the schema
// scenario_id,weight,<metric>...[,resim_outcome]; id columns (scenario_id,
// seed_id) hold text, everything else is numeric.
struct ScenarioTable {
  struct Column {
    std::string name;
    bool is_text = false;
    int store_index = 0;  // into text_rows or numeric_rows
  };
  std::vector<Column> columns;                       // file order
  std::vector<std::vector<std::string>> text_rows;   // [row][text column]
  std::vector<std::vector<double>> numeric_rows;     // [row][numeric column]

  std::size_t row_count() const { return numeric_rows.size(); }
  int numeric_index(const std::string& name) const;  // -1 when absent
  int text_index(const std::string& name) const;     // -1 when absent
  std::vector<std::string> numeric_column_names() const;

  // adds or overwrites a numeric column
  void set_numeric_column(const std::string& name, const std::vector<double>& values);
};

struct SchemaOptions {
  std::string id_column = "scenario_id";
  std::string weight_column = "weight";
  std::string outcome_column = "resim_outcome";
};

ScenarioTable load_table(const std::string& path);
void write_table(const ScenarioTable& t, const std::string& path);

MetricDataset extract_metric(const ScenarioTable& t, const std::string& metric,
                             Role role, const SchemaOptions& schema = {},
                             std::vector<std::string>* warnings = nullptr);

std::vector<MetricDataset> load_datasets(const std::string& path,
                                         const std::vector<std::string>& metrics,
                                         Role role,
                                         const SchemaOptions& schema = {},
                                         std::vector<std::string>* warnings = nullptr);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace equibin
