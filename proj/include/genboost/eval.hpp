#pragma once

#include "genboost/booster.hpp"
#include "genboost/dataset.hpp"
#include "genboost/loss.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace genboost {

struct EvalReport {
    std::string model_id;
    std::string dataset_id;  // Dataset::identity()
    double total_nll = 0.0;
    double mean_nll = 0.0;
    std::size_t n = 0;
};

// Sum of per-row loss values at the model's predicted parameters.
// Throws ValidationError when `loss` is not the model's loss and
// NumericError naming the first row with a non-finite value.
EvalReport nll_score(const BoostedModel& model, const Loss& loss, const Dataset& ds,
                     const std::string& model_id = "model");
// Uses the loss recorded in the model.
EvalReport nll_score(const BoostedModel& model, const Dataset& ds, const std::string& model_id = "model");

struct RankedEntry {
    std::size_t rank = 0;  // 1-based; tied entries share a rank
    bool tied = false;
    EvalReport report;
};

// Ascending total NLL, ties ordered by model id. All reports must share
// dataset_id and n.
std::vector<RankedEntry> compare(std::span<const EvalReport> reports);

// Line-oriented "key: value" text.
std::string format_report(const EvalReport& report);
// JSON document, metadata fields as in the model file.
std::string report_json(const EvalReport& report, const BoostedModel& model);

} // namespace genboost
