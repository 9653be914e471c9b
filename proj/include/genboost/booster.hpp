#pragma once

#include "genboost/dataset.hpp"
#include "genboost/loss.hpp"
#include "genboost/tree.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genboost {

// Symmetric truncation to [-m, m]. NaN maps to +m, infinities to their sign.
double clip_gradient(double g, double m) noexcept;

// max(0, h); non-finite h maps to 0.
double effective_hessian(double h) noexcept;

double clamp_to_domain(double theta, const ParameterDomain& domain) noexcept;

// Hyperparameters of one boosted distribution parameter.
struct ParamTrainConfig {
    double eta = 0.1;
    // Cap on trees fitted for this parameter.
    std::size_t rounds = std::numeric_limits<std::size_t>::max();
    double clip_m = 1e4;
    TreeParams tree;
    // Active on 0-based round r when r % interval == offset.
    std::size_t interval = 1;
    std::size_t offset = 0;
    // Overrides for the loss's default domain and MLE starting value.
    std::optional<ParameterDomain> domain;
    std::optional<double> init;

    void validate() const;
    bool active(std::size_t round_index, std::size_t trees_so_far) const noexcept {
        return trees_so_far < rounds && round_index % interval == offset;
    }
};

// Passed to TrainConfig::observer after each tree is fitted.
struct RoundView {
    std::size_t round = 0;  // 1-based
    std::size_t param = 0;
    std::span<const GradPair> grads;
    std::span<const double> theta_before;
    std::span<const double> theta_after;
    const RegressionTree* tree = nullptr;
};

struct TrainConfig {
    std::vector<ParamTrainConfig> params;
    std::size_t total_rounds = 100;
    bool record_trace = true;
    Execution execution = Execution::Parallel;
    std::function<void(const RoundView&)> observer;
};

struct FittedTree {
    RegressionTree tree;
    double eta = 0.0;

    friend bool operator==(const FittedTree&, const FittedTree&) = default;
};

struct ParamEnsemble {
    std::string name;
    double base_value = 0.0;
    ParameterDomain domain;
    std::vector<FittedTree> trees;
};

// One additive tree ensemble per loss parameter.
class BoostedModel {
public:
    BoostedModel(std::string loss_name, std::map<std::string, double> nuisance,
                 std::vector<std::string> feature_names, std::vector<ParamEnsemble> params);

    const std::string& loss_name() const noexcept { return loss_name_; }
    const std::map<std::string, double>& nuisance() const noexcept { return nuisance_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const std::vector<ParamEnsemble>& params() const noexcept { return params_; }
    std::size_t n_params() const noexcept { return params_.size(); }

    LossPtr make_loss() const;

    // theta_j = clamp(...clamp(clamp(base_j + eta_1 f_1(x)) + eta_2 f_2(x))...),
    // the same sequence of clamped updates training applied to each row.
    std::vector<double> predict(std::span<const double> x) const;
    // Per-parameter columns for every row of `ds`.
    std::vector<std::vector<double>> predict(const Dataset& ds) const;

private:
    std::string loss_name_;
    std::map<std::string, double> nuisance_;
    std::vector<std::string> feature_names_;
    std::vector<ParamEnsemble> params_;
};

struct TraceRow {
    std::size_t round = 0;  // 1-based
    std::vector<bool> active;
    double train_nll = 0.0;
};

struct TrainResult {
    BoostedModel model;
    std::vector<TraceRow> trace;
    // Training-path parameter values after the last round, theta[j][i].
    std::vector<std::vector<double>> theta;
};

// Generalized second-order boosting of every loss parameter. Each round
// evaluates gradients of all active parameters at the parameter values from
// the start of the round, then fits one tree per active parameter and applies
// theta_j <- clamp(theta_j + eta_j f(x)).
TrainResult train(const Dataset& ds, const LossPtr& loss, const TrainConfig& config);

} // namespace genboost
