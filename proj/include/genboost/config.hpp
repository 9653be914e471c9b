#pragma once

#include "genboost/booster.hpp"
#include "genboost/dataset.hpp"
#include "genboost/loss.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace genboost {

// Training run description read from a JSON config file. See
// docs/CONFIG.md for the schema. Unknown keys are rejected.
struct RunConfig {
    LossPtr loss;
    std::string loss_name;
    std::map<std::string, double> nuisance;
    CsvColumns columns;
    TrainConfig train;
    std::uint64_t seed = 0;
    std::optional<double> holdout_fraction;
    std::optional<std::string> trace_path;
};

// Validates against the loss arity and the booster constraints; throws
// ValidationError with the offending key path.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

} // namespace genboost
