#pragma once

#include "genboost/dataset.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace genboost {

// Closed interval a boosted parameter is confined to.
struct ParameterDomain {
    double lo = 0.0;
    double hi = 0.0;

    void validate() const;  // throws ValidationError unless lo < hi, both finite
    bool contains(double theta) const noexcept { return theta >= lo && theta <= hi; }
};

// Upper bound on loss arity; lets hot loops keep a parameter vector on the stack.
inline constexpr std::size_t kMaxParams = 8;

// An l-parameter per-sample loss l(theta_1, ..., theta_l; y) together with
// its first and pure second partials. Instances are immutable.
//
// value/grad/hess throw ValidationError when theta leaves the parameter's
// natural range (e.g. a nonpositive mean); the configured ParameterDomain is
// enforced by the booster, not here.
class Loss {
public:
    virtual ~Loss() = default;

    virtual std::string name() const = 0;
    virtual std::vector<std::string> param_names() const = 0;
    std::size_t n_params() const { return param_names().size(); }
    // Constants fixed for the lifetime of the loss (e.g. a gamma shape).
    virtual std::map<std::string, double> nuisance() const { return {}; }

    virtual double value(std::span<const double> theta, const Observation& obs) const = 0;
    virtual double grad(std::size_t j, std::span<const double> theta, const Observation& obs) const = 0;
    // d^2 l / d theta_j^2. Cross partials are never needed.
    virtual double hess(std::size_t j, std::span<const double> theta, const Observation& obs) const = 0;

    virtual std::vector<ParameterDomain> default_domains(const Dataset& ds) const = 0;
    // Constant starting point; always inside `domains`.
    virtual std::vector<double> mle_init(const Dataset& ds,
                                         std::span<const ParameterDomain> domains) const = 0;
    std::vector<double> mle_init(const Dataset& ds) const { return mle_init(ds, default_domains(ds)); }

    // Throws ValidationError naming the first row whose response is invalid
    // for this loss.
    virtual void validate_response(const Dataset& ds) const;
};

using LossPtr = std::shared_ptr<const Loss>;

// 1/2 (theta - y)^2 on [-1e9, 1e9].
LossPtr squared_error();

// Gamma negative log-likelihood in the mean parameterization mu = alpha * scale
// with shape alpha held fixed.
LossPtr gamma_nll(double alpha);

// Zero-inflated Poisson NLL in the mean mu = alpha * lambda, where alpha in
// (0, 1] is the weight of the Poisson component.
LossPtr zip_nll(double alpha);

// Negative binomial NLL in (beta, gamma) with r = exposure * gamma and
// b = adjustment * beta:
//   P(y) = C(y + r - 1, y) (1 / (1 + b))^r (b / (1 + b))^y.
LossPtr negbin_nll();

// ((theta - y)^2 - 1)^2: two minima at y +- 1. Ships as a known-bad input
// for the admissibility checker.
LossPtr double_well();

// Lookup by name: squared_error, gamma (alpha), zip (alpha), negbin, double_well.
LossPtr make_loss(const std::string& name, const std::map<std::string, double>& nuisance = {});
std::vector<std::string> builtin_loss_names();

} // namespace genboost
