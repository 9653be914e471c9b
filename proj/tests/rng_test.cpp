#include "genboost/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace genboost;

TEST(CounterRng, SameKeySameStream) {
    CounterRng a(42, 7);
    CounterRng b(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, StreamsDiffer) {
    CounterRng a(42, 7);
    CounterRng b(42, 8);
    CounterRng c(43, 7);
    int equal_ab = 0;
    int equal_ac = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        equal_ab += x == b.next_u64();
        equal_ac += x == c.next_u64();
    }
    EXPECT_EQ(equal_ab, 0);
    EXPECT_EQ(equal_ac, 0);
}

TEST(CounterRng, SplitMixReferenceVector) {
    // First output of the reference SplitMix64 generator seeded with 0.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(CounterRng, UniformOpenInterval) {
    CounterRng r(1, 0);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

struct Moments {
    double mean = 0;
    double var = 0;
};

template <typename Draw>
Moments moments(int n, Draw draw) {
    std::vector<double> xs(n);
    double s = 0;
    for (auto& x : xs) s += (x = draw());
    const double m = s / n;
    double v = 0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, v / (n - 1)};
}

TEST(CounterRng, NormalMoments) {
    CounterRng r(3, 1);
    const auto m = moments(200000, [&] { return r.normal(); });
    EXPECT_NEAR(m.mean, 0.0, 0.01);
    EXPECT_NEAR(m.var, 1.0, 0.02);
}

TEST(CounterRng, GammaMoments) {
    for (double shape : {0.3, 1.0, 5.0, 50.0}) {
        CounterRng r(5, 2);
        const double scale = 0.8;
        const auto m = moments(200000, [&] { return r.gamma(shape, scale); });
        EXPECT_NEAR(m.mean, shape * scale, 0.02 * shape * scale) << shape;
        EXPECT_NEAR(m.var, shape * scale * scale, 0.05 * shape * scale * scale) << shape;
    }
}

TEST(CounterRng, PoissonMomentsBothRegimes) {
    for (double mean : {0.05, 1.0, 7.5, 29.9, 30.0, 120.0, 5000.0}) {
        CounterRng r(9, 4);
        const auto m = moments(200000, [&] { return static_cast<double>(r.poisson(mean)); });
        EXPECT_NEAR(m.mean, mean, 0.02 * mean + 0.002) << mean;
        EXPECT_NEAR(m.var, mean, 0.05 * mean + 0.002) << mean;
    }
}

TEST(CounterRng, PoissonZeroProbability) {
    CounterRng r(11, 0);
    const double mean = 1.3;
    int zeros = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) zeros += r.poisson(mean) == 0;
    EXPECT_NEAR(zeros / double(n), std::exp(-mean), 0.005);
}
