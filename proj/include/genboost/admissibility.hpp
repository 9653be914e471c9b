#pragma once

#include "genboost/loss.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace genboost {

enum class SliceShape { SingleMinimum, StrictlyMonotonic, Fail };

std::string to_string(SliceShape shape);

// Outcome of scanning one coordinate of the loss at one response value.
struct SliceReport {
    double y = 0.0;
    std::size_t param = 0;
    std::string param_name;
    SliceShape shape = SliceShape::Fail;
    // Strict local minima of the sampled values, including a domain endpoint
    // when the slice rises away from it.
    std::vector<double> minima;
    std::size_t grad_sign_changes = 0;
    bool grad_consistent = false;  // sampled derivative changes sign only - to + and at most once
};

struct AdmissibilityReport {
    bool pass = false;
    std::vector<SliceReport> slices;
};

// For every y sample and every parameter j, samples l along coordinate j on
// `grid_points` points spanning the default domain (log-spaced when the
// domain is positive, asinh-spaced otherwise) with the other parameters at
// mle_init of the sample set. A slice passes when its values fall then rise
// (one minimum) or move in one direction only, and the derivative agrees.
// Requires grid_points >= 100.
AdmissibilityReport check_admissibility(const Loss& loss, std::span<const double> y_samples,
                                        std::size_t grid_points);

// Grid used by check_admissibility; exposed for tests.
std::vector<double> admissibility_grid(const ParameterDomain& domain, std::size_t points);

} // namespace genboost
