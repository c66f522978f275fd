#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spdelab/philox.hpp"
#include "spdelab/statistics.hpp"

using namespace spdelab;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswerZero) {
    const auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r[0], 0x6627e8d5u);
    EXPECT_EQ(r[1], 0xe169c58du);
    EXPECT_EQ(r[2], 0xbc57ac4cu);
    EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
    const auto r = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(r[0], 0x408f276du);
    EXPECT_EQ(r[1], 0x41c83b0eu);
    EXPECT_EQ(r[2], 0xa20bc7c6u);
    EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto r = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(r[0], 0xd16cfe09u);
    EXPECT_EQ(r[1], 0x94fdccebu);
    EXPECT_EQ(r[2], 0x5001e420u);
    EXPECT_EQ(r[3], 0x24126ea1u);
}

TEST(NormalStream, SameCoordinatesSameValues) {
    NormalStream a(42, StreamTag::noise, 7);
    NormalStream b(42, StreamTag::noise, 7);
    for (int i = 0; i < 101; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(NormalStream, DistinctStreamsDiffer) {
    NormalStream base(42, StreamTag::noise, 7);
    NormalStream other_path(42, StreamTag::noise, 8);
    NormalStream other_tag(42, StreamTag::independent_noise, 7);
    NormalStream other_seed(43, StreamTag::noise, 7);
    const double v = base.next();
    EXPECT_NE(v, other_path.next());
    EXPECT_NE(v, other_tag.next());
    EXPECT_NE(v, other_seed.next());
}

TEST(NormalStream, HighSeedBitsMatter) {
    NormalStream a(1, StreamTag::noise, 0);
    NormalStream b(1 + (std::uint64_t{1} << 40), StreamTag::noise, 0);
    EXPECT_NE(a.next(), b.next());
}

TEST(NormalStream, StandardNormalMoments) {
    NormalStream rng(2024, StreamTag::sampling, 0);
    const std::size_t n = 200000;
    std::vector<double> x(n), x2(n), x4(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.next();
        x2[i] = x[i] * x[i];
        x4[i] = x2[i] * x2[i];
    }
    // Tolerances are about five standard errors.
    EXPECT_NEAR(estimate_mean(x).mean, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(estimate_mean(x2).mean, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(estimate_mean(x4).mean, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(NormalStream, UniformInOpenInterval) {
    NormalStream rng(5, StreamTag::probes, 3);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(NormalStream, FillScales) {
    NormalStream a(9, StreamTag::noise, 1);
    NormalStream b(9, StreamTag::noise, 1);
    std::vector<double> v(5);
    a.fill(v, 0.5);
    for (double x : v) EXPECT_EQ(x, 0.5 * b.next());
}
