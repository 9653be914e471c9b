#include "genboost/error.hpp"
#include "genboost/loss.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

using namespace genboost;

namespace {

// Straightforward transcriptions of the densities, using the C library's
// lgamma. These serve as value oracles independent of the loss classes.
double gamma_nll_ref(double mu, double y, double alpha) {
    return -(alpha * std::log(alpha) - alpha * std::log(mu) - std::lgamma(alpha) + (alpha - 1) * std::log(y) -
             alpha * y / mu);
}

double zip_nll_ref(double mu, double y, double alpha) {
    if (y == 0) return -std::log((1 - alpha) + alpha * std::exp(-mu / alpha));
    const double lambda = mu / alpha;
    return -(std::log(alpha) + y * std::log(lambda) - lambda - std::lgamma(y + 1));
}

double poisson_nll_ref(double mu, double y) { return mu - y * std::log(mu) + std::lgamma(y + 1); }

double negbin_nll_ref(double beta, double gamma, double y, double exposure, double adjustment) {
    const double r = exposure * gamma;
    const double b = adjustment * beta;
    return -(std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1) + r * std::log(1 / (1 + b)) +
             y * std::log(b / (1 + b)));
}

Dataset response_only(std::vector<double> y, std::vector<double> exposure = {}, std::vector<double> adjustment = {}) {
    std::vector<double> x(y.size(), 0.0);
    return Dataset({"x"}, std::move(x), std::move(y), std::move(exposure), std::move(adjustment));
}

double value1(const Loss& loss, double theta, const Observation& obs) {
    const double t[1] = {theta};
    return loss.value(t, obs);
}

} // namespace

TEST(SquaredError, Examples) {
    const auto loss = squared_error();
    EXPECT_EQ(value1(*loss, 3, {3}), 0.0);
    const double t[1] = {3};
    EXPECT_EQ(loss->grad(0, t, {3}), 0.0);
    const double t5[1] = {5};
    EXPECT_EQ(loss->value(t5, {3}), 2.0);
    EXPECT_EQ(loss->grad(0, t5, {3}), 2.0);
    EXPECT_EQ(loss->hess(0, t5, {3}), 1.0);
    EXPECT_EQ(loss->mle_init(response_only({1, 2, 3})), std::vector<double>{2.0});
    const auto d = loss->default_domains(response_only({1}));
    EXPECT_EQ(d[0].lo, -1e9);
    EXPECT_EQ(d[0].hi, 1e9);
}

TEST(GammaNll, Examples) {
    const auto loss = gamma_nll(5);
    const double at4[1] = {4};
    EXPECT_EQ(loss->grad(0, at4, {4}), 0.0);
    EXPECT_NEAR(loss->value(at4, {4}), 1.5172, 5e-5);
    EXPECT_NEAR(loss->value(at4, {4}), gamma_nll_ref(4, 4, 5), 1e-13);
    const double at10[1] = {10};
    EXPECT_NEAR(loss->grad(0, at10, {4}), 0.3, 1e-15);
    EXPECT_NEAR(loss->hess(0, at10, {4}), -0.01, 1e-15);
}

TEST(GammaNll, MatchesReferenceDensity) {
    const auto loss = gamma_nll(2.5);
    for (double mu : {0.01, 0.5, 3.0, 80.0}) {
        for (double y : {0.02, 1.0, 7.5, 300.0}) {
            EXPECT_NEAR(value1(*loss, mu, {y}), gamma_nll_ref(mu, y, 2.5), 1e-12 * std::max(1.0, gamma_nll_ref(mu, y, 2.5)));
        }
    }
}

TEST(GammaNll, StationaryAtResponse) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 500; ++k) {
        const double alpha = std::exp(u(gen));
        const double y = std::exp(u(gen));
        const double t[1] = {y};
        ASSERT_EQ(gamma_nll(alpha)->grad(0, t, {y}), 0.0) << alpha << " " << y;
    }
}

TEST(GammaNll, DomainInitAndValidation) {
    const auto loss = gamma_nll(5);
    const auto ds = response_only({1, 2, 6});
    const auto d = loss->default_domains(ds);
    EXPECT_DOUBLE_EQ(d[0].lo, 3e-6);
    EXPECT_DOUBLE_EQ(d[0].hi, 3e6);
    EXPECT_EQ(loss->mle_init(ds)[0], 3.0);
    EXPECT_THROW(loss->validate_response(response_only({1, 0})), ValidationError);
    EXPECT_THROW(loss->validate_response(response_only({-1})), ValidationError);
    EXPECT_THROW(gamma_nll(0), ValidationError);
    EXPECT_THROW(gamma_nll(-2), ValidationError);
}

TEST(ZipNll, Examples) {
    const auto loss = zip_nll(0.5);
    EXPECT_NEAR(value1(*loss, 1, {2}), 2.0, 1e-14);
    EXPECT_NEAR(value1(*loss, 1, {0}), -std::log(0.5 + 0.5 * std::exp(-2.0)), 1e-15);
    EXPECT_NEAR(value1(*loss, 1, {0}), 0.56622, 5e-6);
}

TEST(ZipNll, MatchesReferenceDensity) {
    for (double alpha : {0.05, 0.3, 0.5, 0.99}) {
        const auto loss = zip_nll(alpha);
        for (double mu : {1e-4, 0.2, 1.0, 6.0, 40.0}) {
            for (double y : {0.0, 1.0, 2.0, 9.0, 60.0}) {
                const double ref = zip_nll_ref(mu, y, alpha);
                ASSERT_NEAR(value1(*loss, mu, {y}), ref, 1e-12 * std::max(1.0, std::abs(ref)))
                    << alpha << " " << mu << " " << y;
            }
        }
    }
}

TEST(ZipNll, AlphaOneIsPoisson) {
    const auto loss = zip_nll(1.0);
    for (double mu : {0.1, 1.0, 10.0}) {
        for (int y = 0; y <= 20; ++y) {
            const double ref = poisson_nll_ref(mu, y);
            ASSERT_NEAR(value1(*loss, mu, {double(y)}), ref, 1e-12) << mu << " " << y;
        }
    }
}

TEST(ZipNll, MleInitMinimizesConstantNll) {
    const double alpha = 0.4;
    const auto loss = zip_nll(alpha);
    const auto ds = response_only({0, 0, 0, 0, 1, 3, 0, 2, 5, 0, 0, 1});
    const double init = loss->mle_init(ds)[0];
    auto total = [&](double mu) {
        double s = 0;
        for (double y : ds.response()) s += zip_nll_ref(mu, y, alpha);
        return s;
    };
    // Dense scan followed by a fine local scan, independent of the golden-section search.
    double best = 1e-3;
    for (double mu = 1e-3; mu < 20; mu *= 1.001) {
        if (total(mu) < total(best)) best = mu;
    }
    double fine = best;
    for (double mu = best * 0.998; mu <= best * 1.002; mu += best * 1e-7) {
        if (total(mu) < total(fine)) fine = mu;
    }
    EXPECT_NEAR(init, fine, 1e-5 * fine);
    EXPECT_LE(total(init), total(fine) + 1e-10);
}

TEST(ZipNll, AllZeroResponsesInitAtLowerBound) {
    const auto loss = zip_nll(0.5);
    const auto ds = response_only({0, 0, 0});
    const auto d = loss->default_domains(ds);
    EXPECT_EQ(d[0].lo, 1e-6);
    EXPECT_EQ(d[0].hi, 1e6);
    const double init = loss->mle_init(ds)[0];
    EXPECT_TRUE(d[0].contains(init));
    EXPECT_LT(init, 1e-4);
}

TEST(ZipNll, Validation) {
    EXPECT_THROW(zip_nll(0.0), ValidationError);
    EXPECT_THROW(zip_nll(1.01), ValidationError);
    EXPECT_THROW(zip_nll(0.5)->validate_response(response_only({1.5})), ValidationError);
    EXPECT_THROW(zip_nll(0.5)->validate_response(response_only({-1})), ValidationError);
}

TEST(NegBinNll, Examples) {
    const auto loss = negbin_nll();
    const double t[2] = {1.5, 2.0};
    EXPECT_NEAR(loss->value(t, {3}), 1.9788, 5e-5);
    EXPECT_NEAR(loss->value(t, {3}), negbin_nll_ref(1.5, 2, 3, 1, 1), 1e-13);
    EXPECT_NEAR(loss->grad(0, t, {3}), 0.0, 1e-15);
    const double t11[2] = {1.0, 1.0};
    EXPECT_NEAR(loss->value(t11, {0, 2, 1}), 2 * std::log(2.0), 1e-15);
}

TEST(NegBinNll, MatchesReferenceIncludingLargeCounts) {
    const auto loss = negbin_nll();
    for (double y : {0.0, 1.0, 7.0, 64.0, 65.0, 500.0}) {
        for (double e : {0.5, 2.0}) {
            for (double a : {0.7, 1.0}) {
                const double t[2] = {1.3, 2.2};
                const double ref = negbin_nll_ref(1.3, 2.2, y, e, a);
                ASSERT_NEAR(loss->value(t, {y, e, a}), ref, 1e-11 * std::max(1.0, std::abs(ref))) << y;
            }
        }
    }
}

TEST(NegBinNll, BetaStationaryAtPerSamplePoint) {
    const auto loss = negbin_nll();
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int k = 0; k < 300; ++k) {
        const double y = 1 + k % 40;
        const double e = u(gen);
        const double a = u(gen);
        const double g = u(gen);
        const double beta = y / (e * g) / a;
        const double t[2] = {beta, g};
        const Observation obs{y, e, a};
        // Scale: the two terms of the derivative each have magnitude a * y / b.
        ASSERT_NEAR(loss->grad(0, t, obs), 0.0, 1e-13 * a * y / (a * beta)) << y;
    }
}

TEST(NegBinNll, MethodOfMomentsInit) {
    const auto loss = negbin_nll();
    const std::vector<double> y = {0, 1, 4, 0, 2, 9, 3, 0, 0, 6};
    const std::vector<double> e = {1, 0.5, 2, 1, 1, 2, 0.5, 1, 2, 1};
    const std::vector<double> a = {1, 1, 0.8, 1, 1.2, 1, 1, 0.9, 1, 1};
    const auto ds = response_only(y, e, a);
    const double n = y.size();
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double v = 0;
    for (double yi : y) v += (yi - m) * (yi - m);
    v /= n;
    double se = 0, sea = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        se += e[i];
        sea += e[i] * a[i];
    }
    const double beta = (v - m) / m / (sea / se);
    // mean response = (mean exposure * adjustment) * beta * gamma
    const double gamma = m / (sea / n) / beta;
    const auto init = loss->mle_init(ds);
    EXPECT_NEAR(init[0], beta, 1e-14 * beta);
    EXPECT_NEAR(init[1], gamma, 1e-14 * gamma);
}

TEST(NegBinNll, UnderdispersedInitClampsToLowerBeta) {
    const auto loss = negbin_nll();
    const auto ds = response_only({2, 2, 2, 3});
    const auto init = loss->mle_init(ds);
    EXPECT_EQ(init[0], 1e-4);
    EXPECT_EQ(init[1], 1e4);  // 2.25 / 1e-4 clamps to the upper bound
    const auto zeros = loss->mle_init(response_only({0, 0}));
    EXPECT_EQ(zeros[0], 1e-4);
    EXPECT_EQ(zeros[1], 1e-4);
}

TEST(MakeLoss, Registry) {
    EXPECT_EQ(make_loss("squared_error")->name(), "squared_error");
    EXPECT_EQ(make_loss("gamma", {{"alpha", 2}})->nuisance().at("alpha"), 2.0);
    EXPECT_EQ(make_loss("zip", {{"alpha", 0.5}})->n_params(), 1u);
    EXPECT_EQ(make_loss("negbin")->param_names(), (std::vector<std::string>{"beta", "gamma"}));
    EXPECT_EQ(make_loss("double_well")->n_params(), 1u);
    EXPECT_THROW(make_loss("tweedie"), ValidationError);
    EXPECT_THROW(make_loss("gamma"), ValidationError);
    EXPECT_THROW(make_loss("negbin", {{"alpha", 1}}), ValidationError);
    EXPECT_THROW(make_loss("gamma", {{"alpha", 1}, {"shape", 2}}), ValidationError);
    for (const auto& name : builtin_loss_names()) EXPECT_FALSE(name.empty());
}

TEST(ParameterDomain, Validate) {
    EXPECT_NO_THROW((ParameterDomain{0, 1}.validate()));
    EXPECT_THROW((ParameterDomain{1, 1}.validate()), ValidationError);
    EXPECT_THROW((ParameterDomain{0, INFINITY}.validate()), ValidationError);
}

// Finite-difference checks over random points of a sub-box of each domain.
// Positive parameters are drawn log-uniformly on [0.05, 50]; the step is
// 1e-5 * max(1, |theta|).
struct FdCase {
    std::string name;
    LossPtr loss;
    std::function<Observation(std::mt19937_64&)> draw_obs;
    std::function<double(std::mt19937_64&)> draw_theta;
};


std::vector<FdCase> fd_cases() {
    auto log_uniform = [](double lo, double hi) {
        return [=](std::mt19937_64& g) {
            return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(g));
        };
    };
    auto count = [](int hi) {
        return [=](std::mt19937_64& g) {
            return Observation{double(std::uniform_int_distribution<int>(0, hi)(g)),
                               std::uniform_real_distribution<double>(0.2, 3.0)(g),
                               std::uniform_real_distribution<double>(0.3, 1.5)(g)};
        };
    };
    auto positive = [](std::mt19937_64& g) {
        return Observation{std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(100))(g))};
    };
    auto real = [](std::mt19937_64& g) { return Observation{std::uniform_real_distribution<double>(-50, 50)(g)}; };
    auto real_theta = [](std::mt19937_64& g) { return std::uniform_real_distribution<double>(-100, 100)(g); };
    return {
        {"squared_error", squared_error(), real, real_theta},
        {"gamma_0.5", gamma_nll(0.5), positive, log_uniform(0.05, 50)},
        {"gamma_5", gamma_nll(5), positive, log_uniform(0.05, 50)},
        {"zip_0.2", zip_nll(0.2), count(20), log_uniform(0.05, 50)},
        {"zip_1", zip_nll(1.0), count(20), log_uniform(0.05, 50)},
        {"negbin", negbin_nll(), count(30), log_uniform(0.05, 50)},
        {"negbin_large_counts", negbin_nll(), count(300), log_uniform(0.05, 50)},
        {"double_well", double_well(), real, real_theta},
    };
}

TEST(FiniteDifference, GradAndHessAgreeWithValue) {
    for (const auto& c : fd_cases()) {
        std::mt19937_64 gen(12345);
        const std::size_t l = c.loss->n_params();
        for (int k = 0; k < 200; ++k) {
            const Observation obs = c.draw_obs(gen);
            std::vector<double> theta(l);
            for (auto& t : theta) t = c.draw_theta(gen);
            for (std::size_t j = 0; j < l; ++j) {
                const double h = 1e-5 * std::max(1.0, std::abs(theta[j]));
                auto plus = theta;
                auto minus = theta;
                plus[j] += h;
                minus[j] -= h;
                const double g = c.loss->grad(j, theta, obs);
                const double fd_g = (c.loss->value(plus, obs) - c.loss->value(minus, obs)) / (2 * h);
                ASSERT_LE(std::abs(g - fd_g), 1e-5 * (1 + std::abs(g)))
                    << c.name << " j=" << j << " theta=" << theta[j] << " y=" << obs.y;
                const double hs = c.loss->hess(j, theta, obs);
                const double fd_h = (c.loss->grad(j, plus, obs) - c.loss->grad(j, minus, obs)) / (2 * h);
                ASSERT_LE(std::abs(hs - fd_h), 1e-5 * (1 + std::abs(hs)))
                    << c.name << " j=" << j << " theta=" << theta[j] << " y=" << obs.y;
            }
        }
    }
}
