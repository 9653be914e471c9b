#pragma once

// Data-parallel inner loops of training. Each kernel has a serial reference
// and an OpenMP version; the two produce bit-identical results.

#include "genboost/dataset.hpp"
#include "genboost/loss.hpp"
#include "genboost/tree.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace genboost::kernels {

struct SplitCandidate {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;

    bool found() const noexcept { return feature >= 0; }
};

// True when `challenger` should replace `incumbent` under the fixed order:
// higher gain, then lower feature, then smaller threshold.
bool better_split(const SplitCandidate& challenger, const SplitCandidate& incumbent) noexcept;

// Best admissible split of `rows` along one feature. Candidates whose child
// denominators are not positive or that violate min_leaf_samples are skipped.
// The returned gain is recomputed from child sums accumulated in the order of
// `rows`, so equal partitions score equally whichever feature produced them.
SplitCandidate best_split_for_feature(const Dataset& ds, std::span<const std::size_t> rows,
                                      std::span<const GradPair> grads, const TreeParams& params,
                                      std::size_t feature);

SplitCandidate best_split_serial(const Dataset& ds, std::span<const std::size_t> rows,
                                 std::span<const GradPair> grads, const TreeParams& params);
SplitCandidate best_split_parallel(const Dataset& ds, std::span<const std::size_t> rows,
                                   std::span<const GradPair> grads, const TreeParams& params);

// Parameter values, one contiguous vector per parameter (theta[j][i]).
using ParamColumns = std::vector<std::vector<double>>;

// out[i] = (clip(grad_j, clip_m), max(0, hess_j)) at theta(i) for every row.
void grad_pairs_serial(const Loss& loss, std::size_t j, const ParamColumns& theta, const Dataset& ds,
                       double clip_m, std::span<GradPair> out);
void grad_pairs_parallel(const Loss& loss, std::size_t j, const ParamColumns& theta, const Dataset& ds,
                         double clip_m, std::span<GradPair> out);

// theta[i] <- clamp(theta[i] + eta * tree(x_i), domain) for every row.
void apply_tree_serial(const RegressionTree& tree, const Dataset& ds, double eta, const ParameterDomain& domain,
                       std::span<double> theta);
void apply_tree_parallel(const RegressionTree& tree, const Dataset& ds, double eta, const ParameterDomain& domain,
                         std::span<double> theta);

// Sum of per-row loss values. The parallel version evaluates rows
// concurrently but accumulates in row order, so both return the same bits.
double total_loss_serial(const Loss& loss, const ParamColumns& theta, const Dataset& ds);
double total_loss_parallel(const Loss& loss, const ParamColumns& theta, const Dataset& ds);

} // namespace genboost::kernels
