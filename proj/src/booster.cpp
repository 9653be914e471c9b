#include "genboost/booster.hpp"

#include "genboost/error.hpp"
#include "genboost/kernels.hpp"
#include "genboost/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genboost {

double clip_gradient(double g, double m) noexcept {
    if (std::isnan(g)) return m;
    if (g >= m) return m;
    if (g <= -m) return -m;
    return g;
}

double effective_hessian(double h) noexcept {
    if (!std::isfinite(h)) return 0.0;
    return std::max(0.0, h);
}

double clamp_to_domain(double theta, const ParameterDomain& domain) noexcept {
    return std::min(domain.hi, std::max(domain.lo, theta));
}

void ParamTrainConfig::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
    if (!(clip_m > 0.0)) throw ValidationError("clip_m must be positive");
    tree.validate();
    if (interval < 1) throw ValidationError("interval must be >= 1");
    if (offset >= interval) throw ValidationError("offset must be smaller than interval");
    if (domain) domain->validate();
    if (init && !std::isfinite(*init)) throw ValidationError("init must be finite");
}

// --- BoostedModel ---------------------------------------------------------

BoostedModel::BoostedModel(std::string loss_name, std::map<std::string, double> nuisance,
                           std::vector<std::string> feature_names, std::vector<ParamEnsemble> params)
    : loss_name_(std::move(loss_name)),
      nuisance_(std::move(nuisance)),
      feature_names_(std::move(feature_names)),
      params_(std::move(params)) {
    if (params_.empty()) throw ValidationError("model needs at least one parameter");
    if (params_.size() > kMaxParams) throw ValidationError("model has too many parameters");
    if (feature_names_.empty()) throw ValidationError("model needs at least one feature");
    for (const auto& p : params_) {
        p.domain.validate();
        if (!p.domain.contains(p.base_value)) {
            throw ValidationError("base value of '" + p.name + "' lies outside its domain");
        }
        for (const auto& t : p.trees) {
            if (!std::isfinite(t.eta)) throw ValidationError("tree eta must be finite");
        }
    }
}

LossPtr BoostedModel::make_loss() const { return genboost::make_loss(loss_name_, nuisance_); }

std::vector<double> BoostedModel::predict(std::span<const double> x) const {
    if (x.size() != feature_names_.size()) {
        std::string expected;
        for (const auto& name : feature_names_) expected += (expected.empty() ? "" : ",") + name;
        throw ValidationError("expected " + std::to_string(feature_names_.size()) + " features (" + expected +
                              "), got " + std::to_string(x.size()));
    }
    std::vector<double> out(params_.size());
    for (std::size_t j = 0; j < params_.size(); ++j) {
        const auto& p = params_[j];
        double theta = p.base_value;
        for (const auto& t : p.trees) theta = clamp_to_domain(theta + t.eta * t.tree.predict(x), p.domain);
        out[j] = theta;
    }
    return out;
}

std::vector<std::vector<double>> BoostedModel::predict(const Dataset& ds) const {
    if (ds.cols() != feature_names_.size()) {
        throw ValidationError("dataset has " + std::to_string(ds.cols()) + " features, model expects " +
                              std::to_string(feature_names_.size()));
    }
    std::vector<std::vector<double>> out(params_.size());
    for (std::size_t j = 0; j < params_.size(); ++j) {
        const auto& p = params_[j];
        out[j].assign(ds.rows(), p.base_value);
        for (const auto& t : p.trees) kernels::apply_tree_parallel(t.tree, ds, t.eta, p.domain, out[j]);
    }
    return out;
}

// --- training -------------------------------------------------------------

TrainResult train(const Dataset& ds, const LossPtr& loss, const TrainConfig& config) {
    if (!loss) throw ValidationError("train: no loss given");
    const std::size_t l = loss->n_params();
    if (config.params.size() != l) {
        throw ValidationError("loss '" + loss->name() + "' has " + std::to_string(l) + " parameters but " +
                              std::to_string(config.params.size()) + " parameter configs were given");
    }
    if (l > kMaxParams) throw ValidationError("loss has too many parameters");
    for (const auto& p : config.params) p.validate();
    loss->validate_response(ds);

    const auto names = loss->param_names();
    auto domains = loss->default_domains(ds);
    for (std::size_t j = 0; j < l; ++j) {
        if (config.params[j].domain) domains[j] = *config.params[j].domain;
        domains[j].validate();
    }
    auto start = loss->mle_init(ds, domains);
    for (std::size_t j = 0; j < l; ++j) {
        if (config.params[j].init) start[j] = *config.params[j].init;
        start[j] = clamp_to_domain(start[j], domains[j]);
    }

    const std::size_t n = ds.rows();
    const bool parallel = config.execution == Execution::Parallel;
    kernels::ParamColumns theta(l);
    std::vector<ParamEnsemble> ensembles(l);
    for (std::size_t j = 0; j < l; ++j) {
        theta[j].assign(n, start[j]);
        ensembles[j].name = names[j];
        ensembles[j].base_value = start[j];
        ensembles[j].domain = domains[j];
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    std::vector<TraceRow> trace;
    trace.reserve(config.record_trace ? config.total_rounds : 0);
    std::vector<std::vector<GradPair>> grads(l, std::vector<GradPair>(n));
    std::vector<double> before;

    for (std::size_t round = 1; round <= config.total_rounds; ++round) {
        std::vector<bool> active(l);
        for (std::size_t j = 0; j < l; ++j) {
            active[j] = config.params[j].active(round - 1, ensembles[j].trees.size());
        }
        // All active gradients are taken at the start-of-round parameters.
        for (std::size_t j = 0; j < l; ++j) {
            if (!active[j]) continue;
            if (parallel) {
                kernels::grad_pairs_parallel(*loss, j, theta, ds, config.params[j].clip_m, grads[j]);
            } else {
                kernels::grad_pairs_serial(*loss, j, theta, ds, config.params[j].clip_m, grads[j]);
            }
        }
        for (std::size_t j = 0; j < l; ++j) {
            if (!active[j]) continue;
            const auto& pc = config.params[j];
            RegressionTree tree = build_tree(grads[j], ds, rows, pc.tree, config.execution);
            if (config.observer) before = theta[j];
            if (parallel) {
                kernels::apply_tree_parallel(tree, ds, pc.eta, domains[j], theta[j]);
            } else {
                kernels::apply_tree_serial(tree, ds, pc.eta, domains[j], theta[j]);
            }
            ensembles[j].trees.push_back({std::move(tree), pc.eta});
            if (config.observer) {
                config.observer(RoundView{round, j, grads[j], before, theta[j], &ensembles[j].trees.back().tree});
            }
        }
        if (config.record_trace) {
            const double total = parallel ? kernels::total_loss_parallel(*loss, theta, ds)
                                          : kernels::total_loss_serial(*loss, theta, ds);
            if (!std::isfinite(total)) {
                throw NumericError("training loss became non-finite at round " + std::to_string(round));
            }
            trace.push_back({round, std::move(active), total});
        }
    }

    BoostedModel model(loss->name(), loss->nuisance(), ds.feature_names(), std::move(ensembles));
    return {std::move(model), std::move(trace), std::move(theta)};
}

} // namespace genboost
