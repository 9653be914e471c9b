#include "genboost/kernels.hpp"

#include "genboost/booster.hpp"
#include "genboost/error.hpp"

#include <algorithm>
#include <array>
#include <exception>
#include <mutex>
#include <utility>

#include <omp.h>

namespace genboost::kernels {

namespace {

// Runs body(i) for i in [0, n) across OpenMP threads and rethrows the first
// exception on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

using ThetaBuffer = std::array<double, kMaxParams>;

std::span<const double> gather(const ParamColumns& theta, std::size_t i, ThetaBuffer& buf) {
    for (std::size_t p = 0; p < theta.size(); ++p) buf[p] = theta[p][i];
    return {buf.data(), theta.size()};
}

void check_arity(const Loss& loss, const ParamColumns& theta, const Dataset& ds) {
    if (theta.size() != loss.n_params() || theta.size() > kMaxParams) {
        throw ValidationError("parameter column count does not match loss arity");
    }
    for (const auto& column : theta) {
        if (column.size() != ds.rows()) throw ValidationError("parameter column length does not match dataset");
    }
}

GradPair grad_pair_at(const Loss& loss, std::size_t j, const ParamColumns& theta, const Dataset& ds,
                      double clip_m, std::size_t i) {
    ThetaBuffer buf;
    const auto view = gather(theta, i, buf);
    const Observation obs = ds.observation(i);
    return {clip_gradient(loss.grad(j, view, obs), clip_m), effective_hessian(loss.hess(j, view, obs))};
}

double midpoint_threshold(double lo, double hi) noexcept {
    double t = 0.5 * lo + 0.5 * hi;
    if (!(t > lo)) t = hi;
    if (t > hi) t = hi;
    return t;
}

bool positive_denominator(const GradPair& s, const TreeParams& params) noexcept {
    return 2.0 * params.a * s.h_eff + params.lambda_reg > 0.0;
}

} // namespace

bool better_split(const SplitCandidate& challenger, const SplitCandidate& incumbent) noexcept {
    if (!challenger.found()) return false;
    if (!incumbent.found()) return true;
    if (challenger.gain != incumbent.gain) return challenger.gain > incumbent.gain;
    if (challenger.feature != incumbent.feature) return challenger.feature < incumbent.feature;
    return challenger.threshold < incumbent.threshold;
}

SplitCandidate best_split_for_feature(const Dataset& ds, std::span<const std::size_t> rows,
                                      std::span<const GradPair> grads, const TreeParams& params,
                                      std::size_t feature) {
    const std::size_t n = rows.size();
    SplitCandidate best;
    if (n < 2) return best;

    std::vector<std::pair<double, std::size_t>> sorted(n);
    for (std::size_t k = 0; k < n; ++k) sorted[k] = {ds.feature(rows[k], feature), rows[k]};
    std::sort(sorted.begin(), sorted.end());

    // suffix[k] = sum over sorted positions k..n-1
    std::vector<GradPair> suffix(n + 1);
    for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + grads[sorted[k].second];

    GradPair left;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        left += grads[sorted[k].second];
        if (sorted[k].first == sorted[k + 1].first) continue;
        const std::size_t left_count = k + 1;
        if (left_count < params.min_leaf_samples || n - left_count < params.min_leaf_samples) continue;
        const GradPair& right = suffix[k + 1];
        if (!positive_denominator(left, params) || !positive_denominator(right, params) ||
            !positive_denominator(left + right, params)) {
            continue;
        }
        SplitCandidate candidate;
        candidate.gain = split_gain(left, right, params);
        candidate.feature = static_cast<int>(feature);
        candidate.threshold = midpoint_threshold(sorted[k].first, sorted[k + 1].first);
        candidate.left_count = left_count;
        if (better_split(candidate, best)) best = candidate;
    }
    if (!best.found()) return best;

    // Re-score the winner from sums taken in row order. Prefix sums run in a
    // per-feature sorted order, so the same partition reached through two
    // features could otherwise score a rounding error apart and break the
    // lower-feature tie rule.
    GradPair left_sum;
    GradPair right_sum;
    for (std::size_t r : rows) {
        (ds.feature(r, feature) < best.threshold ? left_sum : right_sum) += grads[r];
    }
    best.gain = split_gain(left_sum, right_sum, params);
    return best;
}

SplitCandidate best_split_serial(const Dataset& ds, std::span<const std::size_t> rows,
                                 std::span<const GradPair> grads, const TreeParams& params) {
    SplitCandidate best;
    for (std::size_t f = 0; f < ds.cols(); ++f) {
        const auto candidate = best_split_for_feature(ds, rows, grads, params, f);
        if (better_split(candidate, best)) best = candidate;
    }
    return best;
}

SplitCandidate best_split_parallel(const Dataset& ds, std::span<const std::size_t> rows,
                                   std::span<const GradPair> grads, const TreeParams& params) {
    std::vector<SplitCandidate> per_feature(ds.cols());
    parallel_for(ds.cols(), [&](std::size_t f) {
        per_feature[f] = best_split_for_feature(ds, rows, grads, params, f);
    });
    SplitCandidate best;
    for (const auto& candidate : per_feature) {
        if (better_split(candidate, best)) best = candidate;
    }
    return best;
}

void grad_pairs_serial(const Loss& loss, std::size_t j, const ParamColumns& theta, const Dataset& ds,
                       double clip_m, std::span<GradPair> out) {
    check_arity(loss, theta, ds);
    for (std::size_t i = 0; i < ds.rows(); ++i) out[i] = grad_pair_at(loss, j, theta, ds, clip_m, i);
}

void grad_pairs_parallel(const Loss& loss, std::size_t j, const ParamColumns& theta, const Dataset& ds,
                         double clip_m, std::span<GradPair> out) {
    check_arity(loss, theta, ds);
    parallel_for(ds.rows(), [&](std::size_t i) { out[i] = grad_pair_at(loss, j, theta, ds, clip_m, i); });
}

void apply_tree_serial(const RegressionTree& tree, const Dataset& ds, double eta, const ParameterDomain& domain,
                       std::span<double> theta) {
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        theta[i] = clamp_to_domain(theta[i] + eta * tree.predict_row(ds, i), domain);
    }
}

void apply_tree_parallel(const RegressionTree& tree, const Dataset& ds, double eta, const ParameterDomain& domain,
                         std::span<double> theta) {
    parallel_for(ds.rows(), [&](std::size_t i) {
        theta[i] = clamp_to_domain(theta[i] + eta * tree.predict_row(ds, i), domain);
    });
}

double total_loss_serial(const Loss& loss, const ParamColumns& theta, const Dataset& ds) {
    check_arity(loss, theta, ds);
    double total = 0.0;
    ThetaBuffer buf;
    for (std::size_t i = 0; i < ds.rows(); ++i) total += loss.value(gather(theta, i, buf), ds.observation(i));
    return total;
}

double total_loss_parallel(const Loss& loss, const ParamColumns& theta, const Dataset& ds) {
    check_arity(loss, theta, ds);
    std::vector<double> values(ds.rows());
    parallel_for(ds.rows(), [&](std::size_t i) {
        ThetaBuffer buf;
        values[i] = loss.value(gather(theta, i, buf), ds.observation(i));
    });
    double total = 0.0;
    for (double v : values) total += v;
    return total;
}

} // namespace genboost::kernels
