// Serial reference kernels against their OpenMP versions on a synthetic
// negative binomial problem. Pass --benchmark_filter to select kernels.

#include "genboost/kernels.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <numeric>
#include <random>
#include <vector>

using namespace genboost;

namespace {

struct Fixture {
    Dataset ds;
    LossPtr loss = negbin_nll();
    kernels::ParamColumns theta;
    std::vector<GradPair> grads;
    std::vector<std::size_t> rows;
    RegressionTree tree;

    explicit Fixture(std::size_t n)
        : ds(make_data(n)), theta(2, std::vector<double>(n, 1.5)), grads(n), rows(n) {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        kernels::grad_pairs_serial(*loss, 0, theta, ds, 1e4, grads);
        TreeParams params;
        params.max_depth = 6;
        tree = build_tree(grads, ds, rows, params, Execution::Serial);
    }

    static Dataset make_data(std::size_t n) {
        SyntheticOptions opts;
        opts.exposure_levels = {0.5, 1, 2};
        const auto base = generate_synthetic(Distribution::NegBin, n, 1, ParamMap::parse("beta=1:1:2:2,gamma=1:3:1:3"), opts);
        // Pad to eight features so split search has columns to spread over.
        std::mt19937_64 gen(2);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<std::string> names;
        std::vector<double> cols;
        for (std::size_t f = 0; f < 8; ++f) {
            names.push_back("x" + std::to_string(f + 1));
            for (std::size_t i = 0; i < n; ++i) cols.push_back(f < 2 ? base.feature(i, f) : u(gen));
        }
        const auto y = base.response();
        const auto e = base.exposure();
        return Dataset(names, cols, {y.begin(), y.end()}, {e.begin(), e.end()});
    }
};

const Fixture& fixture(std::size_t n) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
    return it->second;
}

template <bool Parallel>
void grad_pairs(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<GradPair> out(f.ds.rows());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::grad_pairs_parallel(*f.loss, 1, f.theta, f.ds, 1e4, out);
        } else {
            kernels::grad_pairs_serial(*f.loss, 1, f.theta, f.ds, 1e4, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void best_split(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    const TreeParams params;
    for (auto _ : state) {
        auto s = Parallel ? kernels::best_split_parallel(f.ds, f.rows, f.grads, params)
                          : kernels::best_split_serial(f.ds, f.rows, f.grads, params);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void apply_tree(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<double> theta(f.ds.rows(), 1.0);
    const ParameterDomain domain{1e-4, 1e4};
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::apply_tree_parallel(f.tree, f.ds, 1e-3, domain, theta);
        } else {
            kernels::apply_tree_serial(f.tree, f.ds, 1e-3, domain, theta);
        }
        benchmark::DoNotOptimize(theta.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void total_loss(benchmark::State& state) {
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const double v = Parallel ? kernels::total_loss_parallel(*f.loss, f.theta, f.ds)
                                  : kernels::total_loss_serial(*f.loss, f.theta, f.ds);
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

#define GENBOOST_BENCH(fn)                                                         \
    BENCHMARK_TEMPLATE(fn, false)->Name(#fn "/serial")->Arg(10000)->Arg(100000);   \
    BENCHMARK_TEMPLATE(fn, true)->Name(#fn "/parallel")->Arg(10000)->Arg(100000)

GENBOOST_BENCH(grad_pairs);
GENBOOST_BENCH(best_split);
GENBOOST_BENCH(apply_tree);
GENBOOST_BENCH(total_loss);

BENCHMARK_MAIN();
