#pragma once

#include <cstdint>

namespace genboost {

// Counter-based generator: the k-th draw of stream s under seed is
// splitmix64(seed, s, k), a pure function of the triple. Any row of a
// synthetic dataset can therefore be generated independently and the
// output does not depend on platform, thread count or draw order elsewhere.
//
// The mixing function is the SplitMix64 finalizer (Steele, Lea, Flood 2014)
// applied to a Weyl sequence keyed by seed and stream.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    double normal() noexcept;
    // Marsaglia-Tsang; shape > 0, scale > 0.
    double gamma(double shape, double scale);
    // Inversion by sequential search for mean < 30, PTRS (Hormann 1993) above.
    std::uint64_t poisson(double mean);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace genboost
