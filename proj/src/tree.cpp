#include "genboost/tree.hpp"

#include "genboost/error.hpp"
#include "genboost/kernels.hpp"
#include "genboost/text.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace genboost {

void TreeParams::validate() const {
    if (!(gamma_reg >= 0.0) || !std::isfinite(gamma_reg)) throw ValidationError("gamma_reg must be >= 0");
    if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) throw ValidationError("lambda_reg must be >= 0");
    if (!(a >= 0.0 && a <= 0.5)) throw ValidationError("a must lie in [0, 0.5]");
    if (a == 0.0 && lambda_reg == 0.0) {
        throw ValidationError("lambda_reg must be positive when a = 0 (leaf weight denominator would vanish)");
    }
    if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (min_leaf_samples < 1) throw ValidationError("min_leaf_samples must be >= 1");
}

namespace {

double denominator(double sum_h_eff, double a, double lambda_reg) {
    const double d = 2.0 * a * sum_h_eff + lambda_reg;
    if (!(d > 0.0)) {
        throw NumericError("leaf denominator 2a*sum(h) + lambda is not positive (" + format_real(d) + ")");
    }
    return d;
}

} // namespace

double leaf_weight(double sum_g, double sum_h_eff, double a, double lambda_reg) {
    return -sum_g / denominator(sum_h_eff, a, lambda_reg);
}

double leaf_score(double sum_g, double sum_h_eff, double a, double lambda_reg) {
    return sum_g * sum_g / denominator(sum_h_eff, a, lambda_reg);
}

double split_gain(const GradPair& left, const GradPair& right, const TreeParams& params) {
    const GradPair pooled = left + right;
    const double a = params.a;
    const double lambda = params.lambda_reg;
    return 0.5 * (leaf_score(left.g, left.h_eff, a, lambda) + leaf_score(right.g, right.h_eff, a, lambda) -
                  leaf_score(pooled.g, pooled.h_eff, a, lambda)) -
           params.gamma_reg;
}

// --- RegressionTree -------------------------------------------------------

RegressionTree::RegressionTree(double weight) {
    TreeNode leaf;
    leaf.weight = weight;
    nodes_.push_back(leaf);
}

RegressionTree RegressionTree::from_nodes(std::vector<TreeNode> nodes, std::size_t n_features) {
    if (nodes.empty()) throw FormatError("tree has no nodes");
    const auto count = static_cast<int>(nodes.size());
    std::vector<char> seen(nodes.size(), 0);
    std::vector<int> stack{0};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(id)]) {
            throw FormatError("tree node " + std::to_string(id) + " is reachable twice (cycle or shared child)");
        }
        seen[static_cast<std::size_t>(id)] = 1;
        ++visited;
        const TreeNode& node = nodes[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            if (!std::isfinite(node.weight)) throw FormatError("leaf " + std::to_string(id) + " has non-finite weight");
            continue;
        }
        if (static_cast<std::size_t>(node.feature) >= n_features) {
            throw FormatError("node " + std::to_string(id) + " splits on feature " + std::to_string(node.feature) +
                              " but the model has " + std::to_string(n_features));
        }
        if (!std::isfinite(node.threshold)) throw FormatError("node " + std::to_string(id) + " has non-finite threshold");
        for (int child : {node.left, node.right}) {
            if (child < 0 || child >= count) {
                throw FormatError("node " + std::to_string(id) + " has child index out of range");
            }
            stack.push_back(child);
        }
    }
    if (visited != nodes.size()) throw FormatError("tree has nodes unreachable from the root");

    RegressionTree tree;
    tree.nodes_ = std::move(nodes);
    return tree;
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const TreeNode& node = nodes_[id];
        const auto f = static_cast<std::size_t>(node.feature);
        if (f >= x.size()) throw ValidationError("feature vector too short for tree");
        id = static_cast<std::size_t>(x[f] < node.threshold ? node.left : node.right);
    }
    return nodes_[id].weight;
}

std::size_t RegressionTree::leaf_of(const Dataset& ds, std::size_t row) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const TreeNode& node = nodes_[id];
        const double v = ds.feature(row, static_cast<std::size_t>(node.feature));
        id = static_cast<std::size_t>(v < node.threshold ? node.left : node.right);
    }
    return id;
}

double RegressionTree::predict_row(const Dataset& ds, std::size_t row) const {
    return nodes_[leaf_of(ds, row)].weight;
}

std::size_t RegressionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const noexcept {
    int deepest = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        const TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            deepest = std::max(deepest, d);
        } else {
            stack.emplace_back(node.left, d + 1);
            stack.emplace_back(node.right, d + 1);
        }
    }
    return deepest;
}

// --- exact greedy builder -------------------------------------------------

namespace {

class Grower {
public:
    Grower(std::span<const GradPair> grads, const Dataset& ds, const TreeParams& params, Execution execution,
           std::vector<TreeNode>& nodes)
        : grads_(grads), ds_(ds), params_(params), execution_(execution), nodes_(nodes) {}

    int grow(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        if (depth < params_.max_depth && rows.size() >= 2 * params_.min_leaf_samples) {
            const auto best = execution_ == Execution::Serial
                                  ? kernels::best_split_serial(ds_, rows, grads_, params_)
                                  : kernels::best_split_parallel(ds_, rows, grads_, params_);
            if (best.found() && best.gain > 0.0) {
                std::vector<std::size_t> left;
                std::vector<std::size_t> right;
                left.reserve(best.left_count);
                right.reserve(rows.size() - best.left_count);
                const auto f = static_cast<std::size_t>(best.feature);
                for (std::size_t r : rows) {
                    (ds_.feature(r, f) < best.threshold ? left : right).push_back(r);
                }
                rows.clear();
                rows.shrink_to_fit();
                nodes_[static_cast<std::size_t>(id)].feature = best.feature;
                nodes_[static_cast<std::size_t>(id)].threshold = best.threshold;
                const int l = grow(std::move(left), depth + 1);
                const int r = grow(std::move(right), depth + 1);
                nodes_[static_cast<std::size_t>(id)].left = l;
                nodes_[static_cast<std::size_t>(id)].right = r;
                return id;
            }
        }

        GradPair sum;
        for (std::size_t r : rows) sum += grads_[r];
        nodes_[static_cast<std::size_t>(id)].weight = leaf_weight(sum.g, sum.h_eff, params_.a, params_.lambda_reg);
        return id;
    }

private:
    std::span<const GradPair> grads_;
    const Dataset& ds_;
    const TreeParams& params_;
    Execution execution_;
    std::vector<TreeNode>& nodes_;
};

} // namespace

RegressionTree build_tree(std::span<const GradPair> grads, const Dataset& ds, std::span<const std::size_t> rows,
                          const TreeParams& params, Execution execution) {
    params.validate();
    if (rows.empty()) throw ValidationError("build_tree: empty row subset");
    if (grads.size() != ds.rows()) throw ValidationError("build_tree: one GradPair per dataset row required");

    RegressionTree tree;
    tree.nodes_.clear();
    Grower grower(grads, ds, params, execution, tree.nodes_);
    grower.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
    return tree;
}

} // namespace genboost
