#include "equibin/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace equibin {

namespace {

bool is_text_column(const std::string& name) {
  return name == "scenario_id" || name == "seed_id";
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw std::runtime_error("row " + std::to_string(row) + ": non-numeric cell '" +
                             cell + "' in column '" + column + "'");
  if (!std::isfinite(v))
    throw std::runtime_error("row " + std::to_string(row) + ": non-finite value in column '" +
                             column + "'");
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void init_columns(ScenarioTable& t, const std::vector<std::string>& names) {
  int text_count = 0, numeric_count = 0;
  for (const auto& name : names) {
    ScenarioTable::Column col;
    col.name = name;
    col.is_text = is_text_column(name);
    col.store_index = col.is_text ? text_count++ : numeric_count++;
    t.columns.push_back(std::move(col));
  }
}

ScenarioTable load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  if (!std::getline(in, line) || trim(line).empty())
    throw std::runtime_error("'" + path + "': empty file");
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(trim(field));
  }
  ScenarioTable t;
  init_columns(t, header);

  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) cells.push_back(field);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != header.size())
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(cells.size()));
    std::vector<std::string> text;
    std::vector<double> numeric;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (t.columns[c].is_text)
        text.push_back(trim(cells[c]));
      else
        numeric.push_back(parse_cell(cells[c], row, t.columns[c].name));
    }
    t.text_rows.push_back(std::move(text));
    t.numeric_rows.push_back(std::move(numeric));
  }
  if (t.numeric_rows.empty()) throw std::runtime_error("'" + path + "': no data rows");
  return t;
}

ScenarioTable load_table_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("'" + path + "': invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_array() || j.empty())
    throw std::runtime_error("'" + path + "': expected a non-empty JSON array of objects");
  const auto& first = j.front();
  if (!first.is_object())
    throw std::runtime_error("'" + path + "': expected objects in the array");
  ScenarioTable t;
  std::vector<std::string> names;
  for (auto it = first.begin(); it != first.end(); ++it) names.push_back(it.key());
  init_columns(t, names);

  std::size_t row = 0;
  for (const auto& obj : j) {
    ++row;
    if (!obj.is_object())
      throw std::runtime_error("row " + std::to_string(row) + ": not an object");
    std::vector<std::string> text;
    std::vector<double> numeric;
    for (const auto& col : t.columns) {
      if (!obj.contains(col.name))
        throw std::runtime_error("row " + std::to_string(row) + ": missing key '" +
                                 col.name + "'");
      const auto& v = obj.at(col.name);
      if (col.is_text) {
        text.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      } else {
        if (!v.is_number())
          throw std::runtime_error("row " + std::to_string(row) +
                                   ": non-numeric value for '" + col.name + "'");
        const double d = v.get<double>();
        if (!std::isfinite(d))
          throw std::runtime_error("row " + std::to_string(row) +
                                   ": non-finite value for '" + col.name + "'");
        numeric.push_back(d);
      }
    }
    t.text_rows.push_back(std::move(text));
    t.numeric_rows.push_back(std::move(numeric));
  }
  return t;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string role_to_string(Role r) {
  return r == Role::reference ? "reference" : "synthetic";
}

WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "none" || s == "raw") return WeightMode::none;
  if (s == "sum_to_n") return WeightMode::sum_to_n;
  throw std::runtime_error("unknown weight mode '" + s + "' (none, sum_to_n)");
}

std::string weight_mode_to_string(WeightMode m) {
  return m == WeightMode::none ? "none" : "sum_to_n";
}

double MetricDataset::weight_sum() const {
  double s = 0.0;
  for (const auto& x : samples) s += x.weight;
  return s;
}

bool MetricDataset::has_outcomes() const {
  return !samples.empty() &&
         std::all_of(samples.begin(), samples.end(),
                     [](const WeightedSample& s) { return s.outcome.has_value(); });
}

void MetricDataset::validate() const {
  if (samples.size() < 2)
    throw std::runtime_error("metric '" + metric_id + "': needs at least 2 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.value))
      throw std::runtime_error("metric '" + metric_id + "' sample " + std::to_string(i + 1) +
                               ": non-finite value");
    if (!std::isfinite(s.weight) || s.weight < 0.0)
      throw std::runtime_error("metric '" + metric_id + "' sample " + std::to_string(i + 1) +
                               ": weight must be finite and >= 0");
    if (s.outcome && (!(*s.outcome >= 0.0) || !(*s.outcome <= 1.0)))
      throw std::runtime_error("metric '" + metric_id + "' sample " + std::to_string(i + 1) +
                               ": outcome outside [0,1]");
  }
  if (!(weight_sum() > 0.0))
    throw std::runtime_error("metric '" + metric_id + "': weight sum must be > 0");
}

MetricDataset normalize_weights(const MetricDataset& d, WeightMode mode) {
  if (mode == WeightMode::none) return d;
  const double wsum = d.weight_sum();
  if (!(wsum > 0.0))
    throw std::runtime_error("normalize_weights: all weights are zero");
  MetricDataset out = d;
  const double scale = static_cast<double>(d.n()) / wsum;
  for (auto& s : out.samples) s.weight *= scale;
  return out;
}

int ScenarioTable::numeric_index(const std::string& name) const {
  for (const auto& c : columns)
    if (!c.is_text && c.name == name) return c.store_index;
  return -1;
}

int ScenarioTable::text_index(const std::string& name) const {
  for (const auto& c : columns)
    if (c.is_text && c.name == name) return c.store_index;
  return -1;
}

std::vector<std::string> ScenarioTable::numeric_column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns)
    if (!c.is_text) names.push_back(c.name);
  return names;
}

void ScenarioTable::set_numeric_column(const std::string& name,
                                       const std::vector<double>& values) {
  if (values.size() != row_count())
    throw std::runtime_error("set_numeric_column: row count mismatch");
  int idx = numeric_index(name);
  if (idx < 0) {
    idx = 0;
    for (const auto& c : columns)
      if (!c.is_text) idx = std::max(idx, c.store_index + 1);
    columns.push_back({name, false, idx});
    for (auto& r : numeric_rows) r.push_back(0.0);
  }
  for (std::size_t r = 0; r < row_count(); ++r) numeric_rows[r][idx] = values[r];
}

ScenarioTable load_table(const std::string& path) {
  if (ends_with(path, ".json")) return load_table_json(path);
  return load_table_csv(path);
}

void write_table(const ScenarioTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  if (ends_with(path, ".json")) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < t.row_count(); ++r) {
      nlohmann::ordered_json obj;
      for (const auto& c : t.columns) {
        if (c.is_text)
          obj[c.name] = t.text_rows[r][c.store_index];
        else
          obj[c.name] = t.numeric_rows[r][c.store_index];
      }
      arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out << (c ? "," : "") << t.columns[c].name;
  out << "\n";
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& col = t.columns[c];
      if (c) out << ",";
      if (col.is_text)
        out << t.text_rows[r][col.store_index];
      else
        out << format_double(t.numeric_rows[r][col.store_index]);
    }
    out << "\n";
  }
}

MetricDataset extract_metric(const ScenarioTable& t, const std::string& metric,
                             Role role, const SchemaOptions& schema,
                             std::vector<std::string>* warnings) {
  const int mcol = t.numeric_index(metric);
  if (mcol < 0) {
    std::string cols;
    for (const auto& c : t.numeric_column_names())
      cols += (cols.empty() ? "" : ", ") + c;
    throw std::runtime_error("metric column '" + metric + "' not found; available: " + cols);
  }
  const int wcol = t.numeric_index(schema.weight_column);
  const int ocol = t.numeric_index(schema.outcome_column);

  MetricDataset d;
  d.metric_id = metric;
  d.role = role;
  d.samples.reserve(t.row_count());
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    WeightedSample s;
    s.value = t.numeric_rows[r][mcol];
    s.weight = (wcol >= 0) ? t.numeric_rows[r][wcol] : 1.0;
    if (s.weight < 0.0)
      throw std::runtime_error("row " + std::to_string(r + 2) + ": negative weight " +
                               format_double(s.weight));
    if (ocol >= 0) {
      const double o = t.numeric_rows[r][ocol];
      if (o < 0.0 || o > 1.0)
        throw std::runtime_error("row " + std::to_string(r + 2) +
                                 ": outcome outside [0,1]: " + format_double(o));
      s.outcome = o;
    }
    d.samples.push_back(s);
  }
  // support declaration for injury-risk metrics: violations warn, not fail
  if (warnings && metric == "P_inj") {
    for (std::size_t r = 0; r < d.samples.size(); ++r) {
      const double v = d.samples[r].value;
      if (v < 0.0 || v > 1.0) {
        warnings->push_back("row " + std::to_string(r + 2) + ": P_inj value " +
                            format_double(v) + " outside [0,1]");
        break;
      }
    }
  }
  d.validate();
  return d;
}

std::vector<MetricDataset> load_datasets(const std::string& path,
                                         const std::vector<std::string>& metrics,
                                         Role role, const SchemaOptions& schema,
                                         std::vector<std::string>* warnings) {
  if (metrics.empty()) throw std::runtime_error("load_datasets: no metrics requested");
  const ScenarioTable t = load_table(path);
  std::vector<MetricDataset> out;
  out.reserve(metrics.size());
  for (const auto& m : metrics) out.push_back(extract_metric(t, m, role, schema, warnings));
  return out;
}

}  // namespace equibin
