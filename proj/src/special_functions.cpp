#include "genboost/special_functions.hpp"

#include "genboost/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace genboost {

namespace {

constexpr double kAsymptoticStart = 10.0;

void require_positive(double x, const char* fn) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw ValidationError(std::string(fn) + ": argument must be positive and finite, got " +
                              std::to_string(x));
    }
}

// Stirling series for ln G(x), x >= 10.
double stirling_log_gamma(double x) {
    // B_2k / (2k (2k - 1)) for k = 1..9
    static constexpr double kCoef[] = {
        1.0 / 12.0,          -1.0 / 360.0,   1.0 / 1260.0,
        -1.0 / 1680.0,       1.0 / 1188.0,   -691.0 / 360360.0,
        1.0 / 156.0,         -3617.0 / 122400.0, 43867.0 / 244188.0,
    };
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double power = inv;
    for (double c : kCoef) {
        series += c * power;
        power *= inv2;
    }
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

} // namespace

double log_gamma(double x) {
    require_positive(x, "log_gamma");
    if (x < 0.5) {
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    // Small integers: (x - 1)! is exact in double up to 22!.
    if (x <= 23.0 && x == std::floor(x)) {
        double factorial = 1.0;
        for (double k = 2.0; k < x; k += 1.0) factorial *= k;
        return std::log(factorial);
    }
    double product = 1.0;
    while (x < kAsymptoticStart) {
        product *= x;
        x += 1.0;
    }
    return stirling_log_gamma(x) - std::log(product);
}

double digamma(double x) {
    require_positive(x, "digamma");
    double shift = 0.0;
    while (x < kAsymptoticStart) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv2 = 1.0 / (x * x);
    const double tail =
        inv2 * (1.0 / 12.0 -
                inv2 * (1.0 / 120.0 -
                        inv2 * (1.0 / 252.0 -
                                inv2 * (1.0 / 240.0 -
                                        inv2 * (1.0 / 132.0 -
                                                inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    return shift + std::log(x) - 0.5 / x - tail;
}

double trigamma(double x) {
    require_positive(x, "trigamma");
    double shift = 0.0;
    while (x < kAsymptoticStart) {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double tail =
        inv * inv2 *
        (1.0 / 6.0 -
         inv2 * (1.0 / 30.0 -
                 inv2 * (1.0 / 42.0 -
                         inv2 * (1.0 / 30.0 -
                                 inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    return shift + inv + 0.5 * inv2 + tail;
}

} // namespace genboost
