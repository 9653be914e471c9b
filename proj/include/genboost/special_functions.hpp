#pragma once

namespace genboost {

// Natural log of the gamma function for x > 0.
//
// For x < 0.5 the reflection formula lnG(x) = ln(pi / sin(pi x)) - lnG(1 - x)
// is applied. Otherwise the argument is shifted by the recurrence
// G(x + 1) = x G(x) until it reaches 10, where the Stirling series
//   (x - 1/2) ln x - x + ln(2 pi)/2 + sum_k B_2k / (2k (2k - 1) x^(2k - 1))
// is summed through B_18. Accuracy is a few ulp of the result. Integer
// arguments up to 23 go through the exact factorial.
// Throws ValidationError for x <= 0 or non-finite x.
double log_gamma(double x);

// psi(x) = d/dx ln G(x), x > 0.
double digamma(double x);

// psi'(x), x > 0.
double trigamma(double x);

} // namespace genboost
