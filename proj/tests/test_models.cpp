#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace spdelab;
using spdelab::testing::desk_model;
using spdelab::testing::gaussian;

TEST(LinearModel, SigmaInverseBoundExample) {
    const Spectrum s = Spectrum::power_law(4, 1.0, 1.0);
    const ModelSpec m = make_linear_model(s, 2, 0.0, {2.0, 1.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(m.constants.sigma_inv_bound, 1.0);
    EXPECT_DOUBLE_EQ(m.constants.sigma0_hs, std::sqrt(5.0));
    EXPECT_EQ(m.constants.K_sigma, 0.0);
    EXPECT_EQ(m.noise_width, 2u);
}

TEST(LinearModel, NoiseWidthCoversEveryNonzeroSigma) {
    const ModelSpec m = desk_model();
    EXPECT_EQ(m.noise_rank, 1u);
    EXPECT_EQ(m.noise_width, 8u);
}

TEST(LinearModel, ZeroSigmaInsideNoiseRankRejected) {
    const Spectrum s = Spectrum::power_law(4, 1.0, 1.0);
    EXPECT_THROW(make_linear_model(s, 2, 0.0, {1.0, 0.0, 0.0, 0.0}), HypothesisError);
    EXPECT_THROW(make_linear_model(s, 4, 0.0, {1.0, 1.0, 1.0, 1.0}), Error);
    EXPECT_THROW(make_linear_model(s, 1, 0.0, {1.0, 1.0}), DimensionError);
}

TEST(LinearModel, DriftLipschitzConstantMatchesBasisVectorMaximum) {
    const Spectrum s = Spectrum::power_law(16, 2.0, 1.5);
    const ModelSpec m = make_linear_model(s, 2, 0.7, sigma_power_rule(s, 0.5, 4));
    // b is linear, so the V*/H ratio is maximised on a basis vector.
    double best = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
        const StateVector e = StateVector::unit(16, i);
        best = std::max(best, norm_v_star(drift_b(m, e), s));
    }
    EXPECT_NEAR(m.constants.K_b, best, 1e-15);
    EXPECT_NEAR(best, 0.7 / std::sqrt(2.0), 1e-15);
}

TEST(LinearModel, AssumptionCheckPasses) {
    const ModelSpec m = desk_model();
    const AssumptionReport rep = check_assumption_A(m, 2000, 3);
    EXPECT_TRUE(rep.pass);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name;
}

TEST(LinearModel, UnderstatedConstantIsCaught) {
    ModelSpec m = desk_model();
    m.constants.K_b = 0.25;
    const AssumptionReport rep = check_assumption_A(m, 500, 3);
    EXPECT_FALSE(rep.pass);
    bool saw = false;
    for (const auto& c : rep.checks) {
        if (c.name == "b_lipschitz") {
            saw = true;
            EXPECT_FALSE(c.pass);
            EXPECT_GT(c.max_observed, 0.25);
        }
    }
    EXPECT_TRUE(saw);
}

TEST(LinearModel, SigmaRoundTrip) {
    const ModelSpec m = with_noise_rank(desk_model(), 4);
    EXPECT_LE(sigma_roundtrip_error(m, 500, 9), 1e-12);
}

TEST(LinearModel, SigmaInverseMatchesDiagonal) {
    const ModelSpec m = with_noise_rank(desk_model(), 4);
    StateVector target(64);
    target[0] = 1.0;
    target[3] = -2.0;
    const StateVector pre = sigma_inv_apply(m, StateVector(64), target);
    ASSERT_EQ(pre.size(), m.noise_width);
    EXPECT_NEAR(pre[0], 1.0, 1e-15);
    EXPECT_NEAR(pre[3], -2.0 * 2.0, 1e-14);
    for (std::size_t i = 4; i < pre.size(); ++i) EXPECT_EQ(pre[i], 0.0);
}

TEST(LinearModel, WithNoiseRankRecomputesConstants) {
    const ModelSpec m1 = desk_model();
    const ModelSpec m4 = with_noise_rank(m1, 4);
    EXPECT_DOUBLE_EQ(m1.constants.sigma_inv_bound, 1.0);
    EXPECT_DOUBLE_EQ(m4.constants.sigma_inv_bound, 2.0);
    EXPECT_DOUBLE_EQ(m4.lambda_next(), 5.0);
    EXPECT_EQ(max_admissible_noise_rank(m1), 8u);
    EXPECT_THROW(with_noise_rank(m1, 9), HypothesisError);
}

TEST(SigmaPowerRule, Values) {
    const Spectrum s(std::vector<double>{1.0, 4.0, 9.0});
    const auto v = sigma_power_rule(s, 0.5, 2);
    EXPECT_DOUBLE_EQ(v[0], 1.0);
    EXPECT_DOUBLE_EQ(v[1], 0.5);
    EXPECT_EQ(v[2], 0.0);
}

TEST(LinearModel, NoBilinearTerm) {
    const ModelSpec m = desk_model(8, 1);
    NormalStream rng(1, StreamTag::sampling, 0);
    const StateVector u = gaussian(rng, 8), v = gaussian(rng, 8), z = gaussian(rng, 8);
    EXPECT_EQ(bilinear_B(m, u, v), StateVector(8));
    EXPECT_EQ(trilinear_form(m, u, v, z), 0.0);
    EXPECT_EQ(estimate_K_B(m, 4, 1), 0.0);
}
