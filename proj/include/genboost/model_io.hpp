#pragma once

#include "genboost/booster.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace genboost {

inline constexpr int kModelFormatVersion = 1;

// Model file layout (JSON, keys sorted):
//   format_version, loss {name, nuisance}, feature_names,
//   parameters: [{name, base_value, domain {lo, hi},
//                 trees: [{eta, nodes: [{kind: "split", feature, threshold, left, right}
//                                       | {kind: "leaf", weight}]}]}]
// Reals are written in shortest round-trip form, so a reloaded model
// predicts bit-identically.
nlohmann::json model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const nlohmann::json& doc);

// format_version, loss and feature_names; shared with evaluation reports.
nlohmann::json model_metadata(const BoostedModel& model);

std::string serialize_model(const BoostedModel& model);
BoostedModel parse_model(std::string_view text);

void save_model(const BoostedModel& model, const std::string& path);
BoostedModel load_model(const std::string& path);

} // namespace genboost
