#include "genboost/booster.hpp"
#include "genboost/error.hpp"
#include "genboost/kernels.hpp"
#include "classic_reference.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

using namespace genboost;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Dataset single(double y) { return Dataset({"x"}, {0.0}, {y}); }

ParamTrainConfig param(double eta, double lambda = 1.0) {
    ParamTrainConfig p;
    p.eta = eta;
    p.tree.lambda_reg = lambda;
    return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Dataset negbin_data(std::size_t n, std::uint64_t seed) {
    SyntheticOptions opts;
    opts.exposure_levels = {0.5, 1, 2};
    return generate_synthetic(Distribution::NegBin, n, seed, ParamMap::parse("beta=1:1:2:2,gamma=1:3:1:3"), opts);
}

// Squared error with an infinite value once theta passes 2.
class Blowup final : public Loss {
public:
    std::string name() const override { return "blowup"; }
    std::vector<std::string> param_names() const override { return {"t"}; }
    double value(std::span<const double> t, const Observation& o) const override {
        return t[0] > 2 ? kInf : 0.5 * (t[0] - o.y) * (t[0] - o.y);
    }
    double grad(std::size_t, std::span<const double> t, const Observation& o) const override { return t[0] - o.y; }
    double hess(std::size_t, std::span<const double>, const Observation&) const override { return 1; }
    std::vector<ParameterDomain> default_domains(const Dataset&) const override { return {{-10, 10}}; }
    std::vector<double> mle_init(const Dataset&, std::span<const ParameterDomain>) const override { return {0}; }
};

} // namespace

TEST(Guards, ClipGradient) {
    EXPECT_EQ(clip_gradient(250, 100), 100);
    EXPECT_EQ(clip_gradient(-50, 100), -50);
    EXPECT_EQ(clip_gradient(kInf, 100), 100);
    EXPECT_EQ(clip_gradient(-kInf, 100), -100);
    EXPECT_EQ(clip_gradient(std::nan(""), 100), 100);
    EXPECT_EQ(clip_gradient(100, 100), 100);
    EXPECT_EQ(clip_gradient(-100, 100), -100);
}

TEST(Guards, EffectiveHessian) {
    EXPECT_EQ(effective_hessian(-0.01), 0);
    EXPECT_EQ(effective_hessian(2), 2);
    EXPECT_EQ(effective_hessian(std::nan("")), 0);
    EXPECT_EQ(effective_hessian(kInf), 0);
}

TEST(Guards, ClampToDomain) {
    const ParameterDomain d{0.01, 1000};
    EXPECT_EQ(clamp_to_domain(1200, d), 1000);
    EXPECT_EQ(clamp_to_domain(5, d), 5);
    EXPECT_EQ(clamp_to_domain(-3, d), 0.01);
}

TEST(ParamTrainConfig, Schedule) {
    ParamTrainConfig p;
    p.interval = 3;
    p.offset = 1;
    p.rounds = 2;
    EXPECT_FALSE(p.active(0, 0));
    EXPECT_TRUE(p.active(1, 0));
    EXPECT_FALSE(p.active(2, 1));
    EXPECT_TRUE(p.active(4, 1));
    EXPECT_FALSE(p.active(7, 2));  // cap reached
}

TEST(ParamTrainConfig, Validation) {
    auto bad = [](auto mutate) {
        ParamTrainConfig p;
        mutate(p);
        return p;
    };
    EXPECT_THROW(bad([](auto& p) { p.eta = 0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& p) { p.eta = 1.5; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& p) { p.clip_m = 0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& p) { p.interval = 0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& p) { p.offset = 2; p.interval = 2; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& p) { p.tree.a = 0; p.tree.lambda_reg = 0; }).validate(), ValidationError);
    EXPECT_THROW(bad([](auto& p) { p.domain = ParameterDomain{2, 1}; }).validate(), ValidationError);
    EXPECT_NO_THROW(bad([](auto& p) { p.eta = 1; }).validate());
}

TEST(Train, NewtonStepSolvesQuadraticInOneRound) {
    TrainConfig cfg;
    cfg.total_rounds = 1;
    cfg.params = {param(1.0, 0.0)};
    cfg.params[0].init = 0.0;
    const auto r = train(single(4), squared_error(), cfg);
    const auto& trees = r.model.params()[0].trees;
    ASSERT_EQ(trees.size(), 1u);
    EXPECT_EQ(trees[0].tree.leaf_count(), 1u);
    EXPECT_EQ(trees[0].tree.nodes()[0].weight, 4.0);
    const double x[1] = {0};
    EXPECT_EQ(r.model.predict(x)[0], 4.0);
    EXPECT_EQ(r.model.params()[0].base_value, 0.0);
}

TEST(Train, GammaCounterexampleConverges) {
    const auto loss = gamma_nll(5);
    const double at10[1] = {10};
    const double g = loss->grad(0, at10, {4});
    const double h = loss->hess(0, at10, {4});
    EXPECT_NEAR(g, 0.3, 1e-15);
    EXPECT_NEAR(h, -0.01, 1e-15);
    const double classic_step = -g / (h + 0.005);
    EXPECT_NEAR(classic_step, 60.0, 1e-9);
    EXPECT_GT(10 + classic_step, 10);  // moves away from the minimum at 4

    TrainConfig cfg;
    cfg.total_rounds = 500;
    cfg.params = {param(0.1, 0.005)};
    cfg.params[0].init = 10.0;
    cfg.params[0].clip_m = 1e6;
    std::vector<double> path;
    cfg.observer = [&](const RoundView& v) { path.push_back(v.theta_after[0]); };
    const auto r = train(single(4), loss, cfg);
    ASSERT_EQ(path.size(), 500u);
    EXPECT_LT(path[0], 10.0);
    for (std::size_t k = 1; k < path.size(); ++k) ASSERT_LE(path[k], path[k - 1]);
    EXPECT_LT(std::abs(path.back() - 4.0), 0.01);
    for (std::size_t k = 1; k < r.trace.size(); ++k) ASSERT_LE(r.trace[k].train_nll, r.trace[k - 1].train_nll);
}

TEST(Train, MatchesClassicReference) {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> normal;
    const std::size_t n = 300, m = 4;
    std::vector<std::vector<double>> x(n, std::vector<double>(m));
    std::vector<double> cols(n * m), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < m; ++f) cols[f * n + i] = x[i][f] = normal(gen);
        y[i] = std::sin(2 * x[i][0]) + x[i][1] * x[i][2] + 0.3 * normal(gen);
    }
    const Dataset ds({"a", "b", "c", "d"}, cols, y);
    TrainConfig cfg;
    cfg.total_rounds = 20;
    cfg.params = {param(0.3, 1.0)};
    cfg.params[0].tree.max_depth = 3;
    cfg.params[0].tree.gamma_reg = 0.1;
    const auto r = train(ds, squared_error(), cfg);
    const auto ref = reference::classic_boost(x, y, 20, 0.3, 1.0, 0.1, 3);
    EXPECT_EQ(r.model.params()[0].base_value, ref.base);
    const auto& trees = r.model.params()[0].trees;
    ASSERT_EQ(trees.size(), ref.trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t) {
        const auto& a = trees[t].tree.nodes();
        const auto& b = ref.trees[t];
        ASSERT_EQ(a.size(), b.size()) << "tree " << t;
        for (std::size_t k = 0; k < a.size(); ++k) {
            ASSERT_EQ(a[k].feature, b[k].feature) << t << "/" << k;
            ASSERT_EQ(a[k].left, b[k].left);
            ASSERT_EQ(a[k].right, b[k].right);
            if (a[k].is_leaf()) {
                ASSERT_NEAR(a[k].weight, b[k].weight, 1e-12);
            } else {
                ASSERT_EQ(a[k].threshold, b[k].threshold);
            }
        }
    }
}

TEST(Train, SmallLearningRateDescends) {
    struct Case {
        LossPtr loss;
        Dataset ds;
    };
    std::vector<Case> cases;
    cases.push_back({squared_error(), generate_synthetic(Distribution::Gamma, 200, 1, ParamMap::parse("mu=1:2:4:8,alpha=2"))});
    cases.push_back({gamma_nll(2), generate_synthetic(Distribution::Gamma, 200, 1, ParamMap::parse("mu=1:2:4:8,alpha=2"))});
    cases.push_back({zip_nll(0.5), generate_synthetic(Distribution::Zip, 200, 2, ParamMap::parse("mu=0.5:1:3:6,alpha=0.5"))});
    cases.push_back({negbin_nll(), negbin_data(200, 3)});
    for (const auto& c : cases) {
        TrainConfig cfg;
        cfg.total_rounds = 100;
        for (std::size_t j = 0; j < c.loss->n_params(); ++j) {
            cfg.params.push_back(param(0.01));
            cfg.params.back().clip_m = 1e6;
        }
        const auto r = train(c.ds, c.loss, cfg);
        for (std::size_t k = 1; k < r.trace.size(); ++k) {
            const double prev = r.trace[k - 1].train_nll;
            ASSERT_LE(r.trace[k].train_nll, prev + 1e-9 * std::max(1.0, std::abs(prev)))
                << c.loss->name() << " round " << r.trace[k].round;
        }
        EXPECT_LT(r.trace.back().train_nll, r.trace.front().train_nll) << c.loss->name();
    }
}

TEST(Train, ReplayMatchesTrainingPath) {
    const Dataset ds = negbin_data(2000, 5);
    TrainConfig cfg;
    cfg.total_rounds = 30;
    cfg.params = {param(0.2), param(0.2)};
    // Narrow domains so that clamping triggers along the way.
    cfg.params[0].domain = ParameterDomain{0.8, 1.6};
    cfg.params[1].domain = ParameterDomain{0.9, 2.5};
    const auto r = train(ds, negbin_nll(), cfg);
    const auto replay = r.model.predict(ds);
    std::size_t at_bound = 0;
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            ASSERT_TRUE(same_bits(replay[j][i], r.theta[j][i])) << j << " " << i;
            const auto single = r.model.predict(ds.row(i));
            ASSERT_TRUE(same_bits(single[j], r.theta[j][i]));
            at_bound += r.theta[j][i] == cfg.params[j].domain->lo || r.theta[j][i] == cfg.params[j].domain->hi;
        }
    }
    EXPECT_GT(at_bound, 0u);
}

TEST(Train, ObserverSeesClippedGradientsAndDomainPaths) {
    const Dataset ds = negbin_data(1000, 6);
    TrainConfig cfg;
    cfg.total_rounds = 25;
    cfg.params = {param(0.5), param(0.5)};
    for (auto& p : cfg.params) {
        p.clip_m = 0.5;
        p.domain = ParameterDomain{0.7, 2.2};
    }
    std::size_t clipped = 0;
    std::size_t views = 0;
    cfg.observer = [&](const RoundView& v) {
        ++views;
        const auto& d = *cfg.params[v.param].domain;
        for (const auto& g : v.grads) {
            ASSERT_LE(std::abs(g.g), 0.5);
            clipped += std::abs(g.g) == 0.5;
        }
        for (double t : v.theta_after) ASSERT_TRUE(d.contains(t));
    };
    train(ds, negbin_nll(), cfg);
    EXPECT_EQ(views, 50u);
    EXPECT_GT(clipped, 0u);
}

TEST(Train, SimultaneousGradientsWithinARound) {
    const Dataset ds = negbin_data(500, 7);
    const auto loss = negbin_nll();
    TrainConfig cfg;
    cfg.total_rounds = 1;
    cfg.params = {param(1.0), param(1.0)};
    std::vector<std::vector<double>> seen_grads(2);
    std::vector<double> before_gamma;
    cfg.observer = [&](const RoundView& v) {
        for (const auto& g : v.grads) seen_grads[v.param].push_back(g.g);
        if (v.param == 1) before_gamma.assign(v.theta_before.begin(), v.theta_before.end());
    };
    const auto r = train(ds, loss, cfg);
    const auto start = loss->mle_init(ds);
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        // gamma's gradient is taken at the start values, before beta moved.
        ASSERT_EQ(seen_grads[1][i], clip_gradient(loss->grad(1, start, ds.observation(i)), 1e4));
        ASSERT_EQ(before_gamma[i], start[1]);
    }
    EXPECT_NE(r.theta[0][0], start[0]);
}

TEST(Train, IntervalScheduleAndCaps) {
    const Dataset ds = negbin_data(500, 8);
    TrainConfig cfg;
    cfg.total_rounds = 10;
    cfg.params = {param(0.1), param(0.1)};
    cfg.params[0].interval = 2;
    cfg.params[0].offset = 0;
    cfg.params[1].interval = 2;
    cfg.params[1].offset = 1;
    cfg.params[1].rounds = 3;
    const auto r = train(ds, negbin_nll(), cfg);
    ASSERT_EQ(r.trace.size(), 10u);
    for (std::size_t k = 0; k < 10; ++k) {
        EXPECT_EQ(r.trace[k].round, k + 1);
        EXPECT_EQ(r.trace[k].active[0], k % 2 == 0);
        EXPECT_EQ(r.trace[k].active[1], k % 2 == 1 && k < 6);
    }
    EXPECT_EQ(r.model.params()[0].trees.size(), 5u);
    EXPECT_EQ(r.model.params()[1].trees.size(), 3u);
}

TEST(Train, ZeroRoundsGivesBaseModel) {
    const Dataset ds = generate_synthetic(Distribution::Gamma, 100, 1, ParamMap::constant({{"mu", 3}, {"alpha", 2}}));
    TrainConfig cfg;
    cfg.total_rounds = 0;
    cfg.params = {param(0.1)};
    const auto r = train(ds, gamma_nll(2), cfg);
    EXPECT_TRUE(r.trace.empty());
    const double mean = std::accumulate(ds.response().begin(), ds.response().end(), 0.0) / 100;
    EXPECT_EQ(r.model.params()[0].base_value, mean);
    const double x[2] = {0.3, 0.3};
    EXPECT_EQ(r.model.predict(x)[0], mean);
}

TEST(Train, DeterministicAcrossExecutionModes) {
    omp_set_num_threads(4);
    const Dataset ds = negbin_data(3000, 9);
    TrainConfig cfg;
    cfg.total_rounds = 15;
    cfg.params = {param(0.1), param(0.1)};
    cfg.execution = Execution::Serial;
    const auto a = train(ds, negbin_nll(), cfg);
    cfg.execution = Execution::Parallel;
    const auto b = train(ds, negbin_nll(), cfg);
    const auto c = train(ds, negbin_nll(), cfg);
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_TRUE(a.model.params()[j].trees == b.model.params()[j].trees);
        EXPECT_TRUE(b.model.params()[j].trees == c.model.params()[j].trees);
        for (std::size_t i = 0; i < ds.rows(); ++i) ASSERT_TRUE(same_bits(a.theta[j][i], b.theta[j][i]));
    }
    for (std::size_t k = 0; k < a.trace.size(); ++k) EXPECT_TRUE(same_bits(a.trace[k].train_nll, b.trace[k].train_nll));
}

TEST(Train, Errors) {
    const Dataset ds = single(4);
    TrainConfig cfg;
    cfg.total_rounds = 3;
    cfg.params = {param(0.1), param(0.1)};
    EXPECT_THROW(train(ds, squared_error(), cfg), ValidationError);  // arity
    cfg.params = {param(0.1)};
    cfg.params[0].tree.a = 0;
    cfg.params[0].tree.lambda_reg = 0;
    EXPECT_THROW(train(ds, squared_error(), cfg), ValidationError);
    cfg.params = {param(0.1)};
    EXPECT_THROW(train(single(-1), gamma_nll(2), cfg), ValidationError);
    EXPECT_THROW(train(ds, nullptr, cfg), ValidationError);

    cfg.params = {param(1.0, 0.0)};
    try {
        train(ds, std::make_shared<Blowup>(), cfg);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("round 1"), std::string::npos) << e.what();
    }
}

TEST(BoostedModel, PredictComposition) {
    std::vector<FittedTree> trees = {{RegressionTree(1.0), 0.5}, {RegressionTree(2.0), 0.5}};
    ParamEnsemble p{"t", 0.0, {-10, 10}, trees};
    const BoostedModel model("squared_error", {}, {"x"}, {p});
    const double x[1] = {0.1};
    EXPECT_EQ(model.predict(x)[0], 1.5);

    ParamEnsemble big{"t", 0.0, {-10, 10}, {{RegressionTree(30.0), 1.0}}};
    EXPECT_EQ(BoostedModel("squared_error", {}, {"x"}, {big}).predict(x)[0], 10.0);

    ParamEnsemble empty{"t", 2.5, {-10, 10}, {}};
    EXPECT_EQ(BoostedModel("squared_error", {}, {"x"}, {empty}).predict(x)[0], 2.5);
}

TEST(BoostedModel, ArityErrorNamesFeatures) {
    ParamEnsemble p{"t", 0.0, {-10, 10}, {}};
    const BoostedModel model("squared_error", {}, {"age", "region"}, {p});
    const double x[1] = {0.1};
    try {
        model.predict(x);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("age,region"), std::string::npos) << e.what();
    }
}

TEST(BoostedModel, ConstructorChecksDomain) {
    ParamEnsemble p{"t", 20.0, {-10, 10}, {}};
    EXPECT_THROW(BoostedModel("squared_error", {}, {"x"}, {p}), ValidationError);
}
