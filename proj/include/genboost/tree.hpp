#pragma once

#include "genboost/dataset.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace genboost {

// Per-sample first-order statistic and clipped second-order statistic
// max(0, h). The approximation weight `a` is applied by the tree formulas.
struct GradPair {
    double g = 0.0;
    double h_eff = 0.0;

    GradPair& operator+=(const GradPair& o) noexcept {
        g += o.g;
        h_eff += o.h_eff;
        return *this;
    }
    friend GradPair operator+(GradPair l, const GradPair& r) noexcept { return l += r; }
};

struct TreeParams {
    double gamma_reg = 0.0;   // per-leaf penalty
    double lambda_reg = 1.0;  // L2 penalty on leaf weights
    double a = 0.5;           // approximation weight in [0, 1/2]
    int max_depth = 6;
    std::size_t min_leaf_samples = 1;

    void validate() const;
};

enum class Execution { Serial, Parallel };

// -sum_g / (2a sum_h + lambda). Throws NumericError if the denominator is not positive.
double leaf_weight(double sum_g, double sum_h_eff, double a, double lambda_reg);

// sum_g^2 / (2a sum_h + lambda); the objective at the optimal weight is -score/2.
double leaf_score(double sum_g, double sum_h_eff, double a, double lambda_reg);

// 1/2 [score(L) + score(R) - score(L + R)] - gamma_reg.
double split_gain(const GradPair& left, const GradPair& right, const TreeParams& params);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Binary regression tree rooted at node 0. A sample goes left iff
// x[feature] < threshold.
class RegressionTree {
public:
    // Single leaf.
    explicit RegressionTree(double weight = 0.0);

    // Validates that `nodes` forms a proper binary tree reachable from node 0
    // with every node visited exactly once and feature indices < n_features.
    // Throws FormatError otherwise.
    static RegressionTree from_nodes(std::vector<TreeNode> nodes, std::size_t n_features);

    double predict(std::span<const double> x) const;
    double predict_row(const Dataset& ds, std::size_t row) const;
    // Index of the leaf node a row reaches.
    std::size_t leaf_of(const Dataset& ds, std::size_t row) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t leaf_count() const noexcept;
    int depth() const noexcept;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

private:
    friend RegressionTree build_tree(std::span<const GradPair>, const Dataset&, std::span<const std::size_t>,
                                     const TreeParams&, Execution);
    std::vector<TreeNode> nodes_;
};

// Exact greedy growth from a single leaf. At each node every feature is
// scanned in sorted order; candidate thresholds are midpoints between
// consecutive distinct values. The best split is taken when its gain is
// positive and both children keep min_leaf_samples rows. Gain ties go to
// the lower feature index, then the smaller threshold, so the result does
// not depend on `execution`.
//
// `grads` is indexed by dataset row; `rows` selects the training subset.
RegressionTree build_tree(std::span<const GradPair> grads, const Dataset& ds,
                          std::span<const std::size_t> rows, const TreeParams& params,
                          Execution execution = Execution::Parallel);

} // namespace genboost
