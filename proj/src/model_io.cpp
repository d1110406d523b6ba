#include "equibin/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace equibin {

nlohmann::ordered_json model_to_json(const FittedModel& m) {
  nlohmann::ordered_json j;
  j["metric"] = m.metric_id;
  j["family"] = family_to_string(m.family);
  j["sign"] = m.sign;
  j["n"] = m.n_data;
  j["seed"] = m.seed;
  j["stream_tag"] = m.stream_tag;
  j["parameter_names"] = m.parameter_names;
  j["draw_count"] = m.draw_count;
  j["diagnostics"] = {
      {"rhat", m.rhat},
      {"ess", m.ess},
      {"accept_rate", m.accept_rate},
      {"converged", m.converged},
  };
  if (m.loo) {
    std::size_t high = 0;
    for (double k : m.loo->pareto_k)
      if (k > 0.7) ++high;
    // -inf marks a constant importance-ratio tail; JSON carries it as null
    nlohmann::ordered_json ks = nlohmann::ordered_json::array();
    for (double k : m.loo->pareto_k) {
      if (std::isfinite(k))
        ks.push_back(k);
      else
        ks.push_back(nullptr);
    }
    j["loo"] = {
        {"elpd", m.loo->elpd},
        {"reliable", m.loo->reliable},
        {"pareto_k_above_0_7", high},
        {"pareto_k", std::move(ks)},
    };
  }
  const int dim = m.dim();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < m.draw_count; ++s) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int p = 0; p < dim; ++p) row.push_back(m.draws[s * dim + p]);
    rows.push_back(std::move(row));
  }
  j["draws"] = std::move(rows);
  return j;
}

FittedModel model_from_json(const nlohmann::ordered_json& j) {
  FittedModel m;
  m.metric_id = j.at("metric").get<std::string>();
  m.family = family_from_string(j.at("family").get<std::string>());
  m.sign = j.at("sign").get<int>();
  if (m.sign != 1 && m.sign != -1)
    throw std::runtime_error("model_from_json: sign must be 1 or -1");
  m.n_data = j.at("n").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.stream_tag = j.at("stream_tag").get<std::uint64_t>();
  m.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
  m.draw_count = j.at("draw_count").get<std::size_t>();
  const auto& diag = j.at("diagnostics");
  m.rhat = diag.at("rhat").get<std::vector<double>>();
  m.ess = diag.at("ess").get<std::vector<double>>();
  m.accept_rate = diag.at("accept_rate").get<double>();
  m.converged = diag.at("converged").get<bool>();
  if (j.contains("loo")) {
    LooResult loo;
    loo.elpd = j.at("loo").at("elpd").get<double>();
    loo.reliable = j.at("loo").at("reliable").get<bool>();
    for (const auto& k : j.at("loo").at("pareto_k"))
      loo.pareto_k.push_back(k.is_null() ? -std::numeric_limits<double>::infinity()
                                         : k.get<double>());
    m.loo = std::move(loo);
  }
  const int dim = m.dim();
  const auto& rows = j.at("draws");
  if (rows.size() != m.draw_count)
    throw std::runtime_error("model_from_json: draw_count mismatch");
  m.draws.reserve(m.draw_count * dim);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim)
      throw std::runtime_error("model_from_json: parameter count mismatch");
    for (const auto& v : row) m.draws.push_back(v.get<double>());
  }
  return m;
}

void save_model(const FittedModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << model_to_json(m).dump(2) << "\n";
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::ordered_json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace equibin
