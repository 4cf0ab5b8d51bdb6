#pragma once

#include <json.hpp>

#include <initializer_list>

#include "latentcast/model.hpp"
#include "latentcast/synthetic.hpp"
#include "latentcast/training.hpp"

namespace latentcast {

/// Throw ConfigError naming `ctx` if `obj` is not a JSON object or holds a
/// key outside `allowed` (strict parsing: typos never pass silently).
void require_allowed_keys(const nlohmann::json& obj, const char* ctx,
                          std::initializer_list<const char*> allowed);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
nlohmann::json train_config_to_json(const TrainConfig& cfg);
nlohmann::json synthetic_config_to_json(const SyntheticConfig& cfg);

/// Parsers apply the JSON's fields on top of `base`, so a partial object
/// overrides a profile. Keys are checked strictly; values are not validated
/// here — call validate() on the composed result.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = ModelConfig{});
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = TrainConfig{});
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j,
                                           SyntheticConfig base = SyntheticConfig{});

}  // namespace latentcast
