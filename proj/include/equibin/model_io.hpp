#pragma once

#include <string>

#include <json.hpp>

#include "equibin/fit.hpp"

namespace equibin {

nlohmann::ordered_json model_to_json(const FittedModel& m);
FittedModel model_from_json(const nlohmann::ordered_json& j);

void save_model(const FittedModel& m, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace equibin
