#include "genboost/loss.hpp"

#include "genboost/error.hpp"
#include "genboost/special_functions.hpp"
#include "genboost/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genboost {

void ParameterDomain::validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw ValidationError("invalid parameter domain [" + format_real(lo) + ", " + format_real(hi) +
                              "]");
    }
}

void Loss::validate_response(const Dataset&) const {}

namespace {

double mean_response(const Dataset& ds) {
    const auto y = ds.response();
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double clamp_into(double v, const ParameterDomain& d) { return std::min(d.hi, std::max(d.lo, v)); }

void require_count_response(const Dataset& ds, const std::string& loss) {
    const auto y = ds.response();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0.0 || y[i] != std::floor(y[i])) {
            throw ValidationError(loss + " requires nonnegative integer responses (row " +
                                  std::to_string(i + 1) + ", y = " + format_real(y[i]) + ")");
        }
    }
}

void require_positive_theta(double theta, const char* what) {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw ValidationError(std::string(what) + " must be positive, got " + format_real(theta));
    }
}

// --- squared error --------------------------------------------------------

class SquaredError final : public Loss {
public:
    std::string name() const override { return "squared_error"; }
    std::vector<std::string> param_names() const override { return {"mean"}; }

    double value(std::span<const double> theta, const Observation& obs) const override {
        const double d = theta[0] - obs.y;
        return 0.5 * d * d;
    }
    double grad(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        return theta[0] - obs.y;
    }
    double hess(std::size_t, std::span<const double>, const Observation&) const override { return 1.0; }

    std::vector<ParameterDomain> default_domains(const Dataset&) const override { return {{-1e9, 1e9}}; }
    std::vector<double> mle_init(const Dataset& ds, std::span<const ParameterDomain> domains) const override {
        return {clamp_into(mean_response(ds), domains[0])};
    }
};

// --- gamma ----------------------------------------------------------------

class GammaNll final : public Loss {
public:
    explicit GammaNll(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw ValidationError("gamma loss: alpha must be positive");
        }
        constant_ = alpha_ * std::log(alpha_) - log_gamma(alpha_);
    }

    std::string name() const override { return "gamma"; }
    std::vector<std::string> param_names() const override { return {"mu"}; }
    std::map<std::string, double> nuisance() const override { return {{"alpha", alpha_}}; }

    double value(std::span<const double> theta, const Observation& obs) const override {
        const double mu = theta[0];
        require_positive_theta(mu, "gamma mu");
        return -(constant_ - alpha_ * std::log(mu) + (alpha_ - 1.0) * std::log(obs.y) - alpha_ * obs.y / mu);
    }
    double grad(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        const double mu = theta[0];
        require_positive_theta(mu, "gamma mu");
        return alpha_ * (mu - obs.y) / (mu * mu);
    }
    double hess(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        const double mu = theta[0];
        require_positive_theta(mu, "gamma mu");
        return alpha_ * (2.0 * obs.y - mu) / (mu * mu * mu);
    }

    std::vector<ParameterDomain> default_domains(const Dataset& ds) const override {
        const double m = mean_response(ds);
        return {{1e-6 * m, 1e6 * m}};
    }
    std::vector<double> mle_init(const Dataset& ds, std::span<const ParameterDomain> domains) const override {
        return {clamp_into(mean_response(ds), domains[0])};
    }
    void validate_response(const Dataset& ds) const override {
        const auto y = ds.response();
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!(y[i] > 0.0)) {
                throw ValidationError("gamma loss requires positive responses (row " + std::to_string(i + 1) +
                                      ", y = " + format_real(y[i]) + ")");
            }
        }
    }

private:
    double alpha_;
    double constant_;
};

// --- zero-inflated Poisson --------------------------------------------------

class ZipNll final : public Loss {
public:
    explicit ZipNll(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("zip loss: alpha must lie in (0, 1]");
        log_alpha_ = std::log(alpha_);
        log_zero_weight_ = alpha_ < 1.0 ? std::log1p(-alpha_) : -INFINITY;
    }

    std::string name() const override { return "zip"; }
    std::vector<std::string> param_names() const override { return {"mu"}; }
    std::map<std::string, double> nuisance() const override { return {{"alpha", alpha_}}; }

    double value(std::span<const double> theta, const Observation& obs) const override {
        const double mu = theta[0];
        require_positive_theta(mu, "zip mu");
        if (obs.y == 0.0) return -log_p_zero(mu);
        const double lambda = mu / alpha_;
        return -(log_alpha_ + obs.y * std::log(lambda) - lambda - log_gamma(obs.y + 1.0));
    }
    double grad(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        const double mu = theta[0];
        require_positive_theta(mu, "zip mu");
        if (obs.y == 0.0) return zero_grad(mu);
        return 1.0 / alpha_ - obs.y / mu;
    }
    double hess(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        const double mu = theta[0];
        require_positive_theta(mu, "zip mu");
        if (obs.y == 0.0) {
            const double g = zero_grad(mu);
            return g * g - g / alpha_;
        }
        return obs.y / (mu * mu);
    }

    std::vector<ParameterDomain> default_domains(const Dataset& ds) const override {
        return {{1e-6, 1e6 * std::max(mean_response(ds), 1.0)}};
    }

    // Golden-section search of the constant-mu NLL over log(mu).
    std::vector<double> mle_init(const Dataset& ds, std::span<const ParameterDomain> domains) const override {
        const ParameterDomain& d = domains[0];
        if (!(d.lo > 0.0)) throw ValidationError("zip mu domain must be positive");
        auto objective = [&](double log_mu) {
            const double mu = std::exp(log_mu);
            const double lzero = log_p_zero(mu);
            const double lambda = mu / alpha_;
            const double log_lambda = std::log(lambda);
            double total = 0.0;
            for (double y : ds.response()) {
                total -= y == 0.0 ? lzero : log_alpha_ + y * log_lambda - lambda;
            }
            return total;
        };
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = std::log(d.lo);
        double b = std::log(d.hi);
        const double tol = 1e-8 * (b - a);
        double c = b - inv_phi * (b - a);
        double e = a + inv_phi * (b - a);
        double fc = objective(c);
        double fe = objective(e);
        while (b - a > tol) {
            if (fc <= fe) {
                b = e;
                e = c;
                fe = fc;
                c = b - inv_phi * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + inv_phi * (b - a);
                fe = objective(e);
            }
        }
        return {clamp_into(std::exp(0.5 * (a + b)), d)};
    }

    void validate_response(const Dataset& ds) const override { require_count_response(ds, "zip loss"); }

private:
    // ln[(1 - alpha) + alpha exp(-mu / alpha)] via log-sum-exp.
    double log_p_zero(double mu) const {
        const double poisson_part = log_alpha_ - mu / alpha_;
        if (alpha_ == 1.0) return poisson_part;
        const double hi = std::max(poisson_part, log_zero_weight_);
        const double lo = std::min(poisson_part, log_zero_weight_);
        return hi + std::log1p(std::exp(lo - hi));
    }
    // d/dmu of -ln P(0) = exp(-mu/alpha) / P(0).
    double zero_grad(double mu) const { return std::exp(-mu / alpha_ - log_p_zero(mu)); }

    double alpha_;
    double log_alpha_;
    double log_zero_weight_;
};

// --- negative binomial ----------------------------------------------------

class NegBinNll final : public Loss {
public:
    static constexpr double kFiniteSumLimit = 64.0;

    std::string name() const override { return "negbin"; }
    std::vector<std::string> param_names() const override { return {"beta", "gamma"}; }

    double value(std::span<const double> theta, const Observation& obs) const override {
        const auto [b, r] = scaled(theta, obs);
        const double y = obs.y;
        double log_rising;  // ln G(y + r) - ln G(r)
        if (y <= kFiniteSumLimit) {
            log_rising = 0.0;
            for (double k = 0.0; k < y; k += 1.0) log_rising += std::log(r + k);
        } else {
            log_rising = log_gamma(y + r) - log_gamma(r);
        }
        const double y_log_b = y == 0.0 ? 0.0 : y * std::log(b);
        return -log_rising + log_gamma(y + 1.0) + (r + y) * std::log1p(b) - y_log_b;
    }

    double grad(std::size_t j, std::span<const double> theta, const Observation& obs) const override {
        const auto [b, r] = scaled(theta, obs);
        const double y = obs.y;
        if (j == 0) {
            const double y_term = y == 0.0 ? 0.0 : y / b;
            return obs.adjustment * ((r + y) / (1.0 + b) - y_term);
        }
        return obs.exposure * (std::log1p(b) - harmonic(y, r));
    }

    double hess(std::size_t j, std::span<const double> theta, const Observation& obs) const override {
        const auto [b, r] = scaled(theta, obs);
        const double y = obs.y;
        if (j == 0) {
            const double y_term = y == 0.0 ? 0.0 : y / (b * b);
            const double onep = 1.0 + b;
            return obs.adjustment * obs.adjustment * (y_term - (r + y) / (onep * onep));
        }
        return obs.exposure * obs.exposure * harmonic_sq(y, r);
    }

    std::vector<ParameterDomain> default_domains(const Dataset&) const override {
        return {{1e-4, 1e4}, {1e-4, 1e4}};
    }

    // Method of moments. The dispersion b = var/mean - 1 is converted to beta
    // with the exposure-weighted mean adjustment, and gamma follows from
    // E[y] = exposure * gamma * adjustment * beta.
    std::vector<double> mle_init(const Dataset& ds, std::span<const ParameterDomain> domains) const override {
        const auto y = ds.response();
        const auto e = ds.exposure();
        const auto a = ds.adjustment();
        const double n = static_cast<double>(y.size());
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= n;
        double sum_e = 0.0;
        double sum_ea = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            sum_e += e[i];
            sum_ea += e[i] * a[i];
        }
        if (!(mean > 0.0)) return {domains[0].lo, domains[1].lo};
        const double mean_adjustment = sum_ea / sum_e;
        const double beta = clamp_into(std::max(domains[0].lo, (var - mean) / mean / mean_adjustment), domains[0]);
        const double gamma = clamp_into(mean * n / (sum_ea * beta), domains[1]);
        return {beta, gamma};
    }

    void validate_response(const Dataset& ds) const override { require_count_response(ds, "negbin loss"); }

private:
    struct Scaled {
        double b;
        double r;
    };
    static Scaled scaled(std::span<const double> theta, const Observation& obs) {
        require_positive_theta(theta[0], "negbin beta");
        require_positive_theta(theta[1], "negbin gamma");
        return {obs.adjustment * theta[0], obs.exposure * theta[1]};
    }
    // psi(y + r) - psi(r)
    static double harmonic(double y, double r) {
        if (y <= kFiniteSumLimit) {
            double s = 0.0;
            for (double k = 0.0; k < y; k += 1.0) s += 1.0 / (r + k);
            return s;
        }
        return digamma(y + r) - digamma(r);
    }
    // psi'(r) - psi'(y + r)
    static double harmonic_sq(double y, double r) {
        if (y <= kFiniteSumLimit) {
            double s = 0.0;
            for (double k = 0.0; k < y; k += 1.0) s += 1.0 / ((r + k) * (r + k));
            return s;
        }
        return trigamma(r) - trigamma(y + r);
    }
};

// --- double well (test fixture) ---------------------------------------------

class DoubleWell final : public Loss {
public:
    std::string name() const override { return "double_well"; }
    std::vector<std::string> param_names() const override { return {"theta"}; }

    double value(std::span<const double> theta, const Observation& obs) const override {
        const double d = theta[0] - obs.y;
        const double w = d * d - 1.0;
        return w * w;
    }
    double grad(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        const double d = theta[0] - obs.y;
        return 4.0 * d * (d * d - 1.0);
    }
    double hess(std::size_t, std::span<const double> theta, const Observation& obs) const override {
        const double d = theta[0] - obs.y;
        return 12.0 * d * d - 4.0;
    }

    std::vector<ParameterDomain> default_domains(const Dataset& ds) const override {
        const auto y = ds.response();
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        return {{*lo - 5.0, *hi + 5.0}};
    }
    std::vector<double> mle_init(const Dataset& ds, std::span<const ParameterDomain> domains) const override {
        return {clamp_into(mean_response(ds), domains[0])};
    }
};

double required_nuisance(const std::map<std::string, double>& nuisance, const std::string& loss,
                         const std::string& key) {
    const auto it = nuisance.find(key);
    if (it == nuisance.end()) throw ValidationError(loss + " loss requires nuisance constant '" + key + "'");
    return it->second;
}

void reject_unknown(const std::map<std::string, double>& nuisance, const std::string& loss,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, v] : nuisance) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(loss + " loss has no nuisance constant '" + key + "'");
    }
}

} // namespace

LossPtr squared_error() { return std::make_shared<SquaredError>(); }
LossPtr gamma_nll(double alpha) { return std::make_shared<GammaNll>(alpha); }
LossPtr zip_nll(double alpha) { return std::make_shared<ZipNll>(alpha); }
LossPtr negbin_nll() { return std::make_shared<NegBinNll>(); }
LossPtr double_well() { return std::make_shared<DoubleWell>(); }

LossPtr make_loss(const std::string& name, const std::map<std::string, double>& nuisance) {
    if (name == "squared_error") {
        reject_unknown(nuisance, name, {});
        return squared_error();
    }
    if (name == "gamma") {
        reject_unknown(nuisance, name, {"alpha"});
        return gamma_nll(required_nuisance(nuisance, name, "alpha"));
    }
    if (name == "zip") {
        reject_unknown(nuisance, name, {"alpha"});
        return zip_nll(required_nuisance(nuisance, name, "alpha"));
    }
    if (name == "negbin") {
        reject_unknown(nuisance, name, {});
        return negbin_nll();
    }
    if (name == "double_well") {
        reject_unknown(nuisance, name, {});
        return double_well();
    }
    throw ValidationError("unknown loss '" + name + "'");
}

std::vector<std::string> builtin_loss_names() {
    return {"squared_error", "gamma", "zip", "negbin", "double_well"};
}

} // namespace genboost
