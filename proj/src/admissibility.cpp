#include "genboost/admissibility.hpp"

#include "genboost/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace genboost {

std::string to_string(SliceShape shape) {
    switch (shape) {
    case SliceShape::SingleMinimum: return "single-minimum";
    case SliceShape::StrictlyMonotonic: return "strictly-monotonic";
    case SliceShape::Fail: return "FAIL";
    }
    return "?";
}

std::vector<double> admissibility_grid(const ParameterDomain& domain, std::size_t points) {
    domain.validate();
    if (points < 2) throw ValidationError("grid needs at least two points");
    std::vector<double> grid(points);
    const double last = static_cast<double>(points - 1);
    if (domain.lo > 0.0) {
        const double a = std::log(domain.lo);
        const double b = std::log(domain.hi);
        for (std::size_t k = 0; k < points; ++k) grid[k] = std::exp(a + (b - a) * static_cast<double>(k) / last);
    } else {
        const double a = std::asinh(domain.lo);
        const double b = std::asinh(domain.hi);
        for (std::size_t k = 0; k < points; ++k) grid[k] = std::sinh(a + (b - a) * static_cast<double>(k) / last);
    }
    grid.front() = domain.lo;
    grid.back() = domain.hi;
    return grid;
}

namespace {

int sign_of_step(double from, double to) {
    const double scale = std::max({1.0, std::fabs(from), std::fabs(to)});
    const double d = to - from;
    if (std::fabs(d) <= 1e-12 * scale) return 0;
    return d > 0.0 ? 1 : -1;
}

SliceReport scan_slice(const Loss& loss, std::size_t j, std::span<const double> base, const Observation& obs,
                       const std::vector<double>& grid) {
    SliceReport report;
    report.y = obs.y;
    report.param = j;
    report.param_name = loss.param_names()[j];

    std::array<double, kMaxParams> theta{};
    std::copy(base.begin(), base.end(), theta.begin());
    const std::span<const double> view(theta.data(), base.size());

    std::vector<double> values(grid.size());
    std::vector<double> grads(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        theta[j] = grid[k];
        values[k] = loss.value(view, obs);
        grads[k] = loss.grad(j, view, obs);
    }

    // Signs of successive value differences, flat steps dropped.
    std::vector<int> signs;
    std::vector<std::size_t> at;  // grid index where each step ends
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const int s = sign_of_step(values[k], values[k + 1]);
        if (s != 0) {
            signs.push_back(s);
            at.push_back(k);
        }
    }
    std::size_t falls_to_rises = 0;
    std::size_t rises_to_falls = 0;
    if (!signs.empty() && signs.front() > 0) report.minima.push_back(grid.front());
    for (std::size_t s = 1; s < signs.size(); ++s) {
        if (signs[s - 1] < 0 && signs[s] > 0) {
            ++falls_to_rises;
            report.minima.push_back(grid[at[s]]);
        } else if (signs[s - 1] > 0 && signs[s] < 0) {
            ++rises_to_falls;
        }
    }
    if (!signs.empty() && signs.back() < 0) report.minima.push_back(grid.back());

    int previous = 0;
    std::size_t grad_up = 0;
    std::size_t grad_down = 0;
    for (double g : grads) {
        const int s = g > 0.0 ? 1 : (g < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (previous != 0 && s != previous) {
            ++report.grad_sign_changes;
            (s > 0 ? grad_up : grad_down) += 1;
        }
        previous = s;
    }
    report.grad_consistent = grad_down == 0 && grad_up <= 1;

    const bool values_ok = rises_to_falls == 0 && falls_to_rises <= 1;
    if (!values_ok || !report.grad_consistent || signs.empty()) {
        report.shape = SliceShape::Fail;
    } else if (falls_to_rises == 1) {
        report.shape = SliceShape::SingleMinimum;
    } else {
        report.shape = SliceShape::StrictlyMonotonic;
    }
    return report;
}

} // namespace

AdmissibilityReport check_admissibility(const Loss& loss, std::span<const double> y_samples,
                                        std::size_t grid_points) {
    if (grid_points < 100) throw ValidationError("admissibility check needs grid_points >= 100");
    if (y_samples.empty()) throw ValidationError("admissibility check needs at least one y sample");
    if (loss.n_params() > kMaxParams) throw ValidationError("loss has too many parameters");

    const std::vector<double> y(y_samples.begin(), y_samples.end());
    const Dataset samples({"unused"}, std::vector<double>(y.size(), 0.0), y);
    loss.validate_response(samples);
    const auto domains = loss.default_domains(samples);
    const auto base = loss.mle_init(samples, domains);

    AdmissibilityReport report;
    report.pass = true;
    for (double yi : y) {
        const Observation obs{yi, 1.0, 1.0};
        for (std::size_t j = 0; j < loss.n_params(); ++j) {
            auto slice = scan_slice(loss, j, base, obs, admissibility_grid(domains[j], grid_points));
            report.pass = report.pass && slice.shape != SliceShape::Fail;
            report.slices.push_back(std::move(slice));
        }
    }
    return report;
}

} // namespace genboost
