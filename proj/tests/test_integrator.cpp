#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace spdelab;
using spdelab::testing::desk_model;
using spdelab::testing::desk_x0;

namespace {

ModelSpec pure_dissipation(std::size_t M) {
    const Spectrum s = Spectrum::power_law(M, 1.0, 1.0);
    std::vector<double> sig(M, 0.0);
    sig[0] = 1.0;
    return make_linear_model(s, 1, 0.0, sig);
}

}  // namespace

TEST(Step, ImplicitDecayWithoutNoise) {
    const ModelSpec m = pure_dissipation(4);
    const StepResult r = step(m, BallState(StateVector{0.5, 0.5, 0.0, 0.0}), StateVector{0.0}, 0.1);
    EXPECT_NEAR(r.state[0], 0.5 / 1.1, 1e-15);
    EXPECT_NEAR(r.state[1], 0.5 / 1.2, 1e-15);
    EXPECT_EQ(r.increment_L, StateVector(4));
}

TEST(Step, ZeroIsFixedWithoutNoise) {
    const ModelSpec m = desk_model(8, 1);
    const StepResult r = step(m, BallState::zero(8), StateVector(m.noise_width), 0.01);
    EXPECT_EQ(r.state.vec(), StateVector(8));
}

TEST(Step, LargeKickIsReflected) {
    const ModelSpec m = pure_dissipation(4);
    const StepResult r = step(m, BallState(StateVector{0.9, 0.0, 0.0, 0.0}), StateVector{5.0}, 0.01);
    EXPECT_NEAR(norm_h(r.state.vec()), 1.0, 1e-15);
    EXPECT_GT(norm_h(r.increment_L), 0.0);
    EXPECT_LT(r.increment_L[0], 0.0);
}

TEST(Step, RejectsBadArguments) {
    const ModelSpec m = pure_dissipation(4);
    EXPECT_THROW(step(m, BallState::zero(4), StateVector{0.0}, 0.0), Error);
    EXPECT_THROW(step(m, BallState::zero(4), StateVector{0.0, 0.0}, 0.1), DimensionError);
}

TEST(Step, HugeStepStaysFinite) {
    const ModelSpec m = desk_model(16, 1);
    const StepResult r = step(m, BallState(desk_x0(16)), StateVector(std::vector<double>(m.noise_width, 3.0)), 1e6);
    EXPECT_TRUE(r.state.vec().all_finite());
    EXPECT_LE(norm_h(r.state.vec()), 1.0 + kBallSlack);
}

TEST(SimulatePath, DeterministicForFixedNoise) {
    const ModelSpec m = desk_model(16, 1);
    const TimeGrid grid(0.5, 500);
    const NoiseBlock n1 = make_noise_block(11, 4, grid, m.noise_width);
    const NoiseBlock n2 = make_noise_block(11, 4, grid, m.noise_width);
    const PathRecord a = simulate_path(m, BallState(desk_x0(16)), grid, n1);
    const PathRecord b = simulate_path(m, BallState(desk_x0(16)), grid, n2);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.v_norm_integral, b.v_norm_integral);
}

TEST(SimulatePath, ShapeAndConstraint) {
    const ModelSpec m = desk_model(16, 1);
    const TimeGrid grid(1.0, 200);
    const PathRecord p = simulate_path(m, BallState(desk_x0(16)), grid, make_noise_block(2, 0, grid, m.noise_width));
    EXPECT_EQ(p.states.size(), 201u);
    EXPECT_EQ(p.local_time.increments.size(), 200u);
    EXPECT_EQ(p.v_norm_integral.size(), 201u);
    for (const auto& s : p.states) EXPECT_LE(norm_h(s.vec()), 1.0 + kBallSlack);
}

TEST(SimulatePath, NoiselessNormDecreases) {
    const ModelSpec m = pure_dissipation(8);
    const TimeGrid grid(1.0, 100);
    NoiseBlock noise = make_noise_block(1, 0, grid, m.noise_width);
    for (double& v : noise.increments) v = 0.0;
    const PathRecord p = simulate_path(m, BallState(StateVector{0.6, 0.3, 0.2, 0.1, 0, 0, 0, 0}), grid, noise);
    for (std::size_t k = 1; k < p.states.size(); ++k) {
        EXPECT_LE(norm_h(p.states[k].vec()), norm_h(p.states[k - 1].vec()));
    }
    EXPECT_EQ(p.local_time.total_variation, 0.0);
}

TEST(PathFunctional, ZeroPath) {
    const ModelSpec m = pure_dissipation(4);
    const TimeGrid grid(1.0, 10);
    NoiseBlock noise = make_noise_block(1, 0, grid, m.noise_width);
    for (double& v : noise.increments) v = 0.0;
    const PathRecord p = simulate_path(m, BallState::zero(4), grid, noise);
    EXPECT_EQ(path_functional_exp_v(p, 0.3), 1.0);
}

TEST(PathFunctional, LeftEndpointRuleByHand) {
    const ModelSpec m = pure_dissipation(2);
    const TimeGrid grid(0.2, 2);
    NoiseBlock noise = make_noise_block(1, 0, grid, m.noise_width);
    for (double& v : noise.increments) v = 0.0;
    const PathRecord p = simulate_path(m, BallState(StateVector{0.5, 0.0}), grid, noise);
    // |X|_V^2 = x_1^2 with lambda_1 = 1: 0.25 at t=0, (0.5/1.1)^2 at t=0.1.
    const double expected = 0.1 * 0.25 + 0.1 * std::pow(0.5 / 1.1, 2);
    EXPECT_NEAR(p.v_norm_integral.back(), expected, 1e-15);
    EXPECT_NEAR(path_functional_exp_v(p, 2.0), std::exp(2.0 * expected), 1e-14);
}

TEST(SimulatePath, FirstOrderInTimeStep) {
    // Without noise and without contact the scheme for mode i is x (1 + h lambda)^{-n}.
    const ModelSpec m = pure_dissipation(1 + 1);
    auto run = [&](std::size_t steps) {
        const TimeGrid grid(1.0, steps);
        NoiseBlock noise = make_noise_block(1, 0, grid, m.noise_width);
        for (double& v : noise.increments) v = 0.0;
        return simulate_path(m, BallState(StateVector{0.0, 0.5}), grid, noise).states.back()[1];
    };
    const double exact = 0.5 * std::exp(-2.0);
    const double e1 = std::abs(run(100) - exact);
    const double e2 = std::abs(run(200) - exact);
    EXPECT_NEAR(e1 / e2, 2.0, 0.05);
}

TEST(NoiseBlock, VarianceMatchesStep) {
    const TimeGrid grid(1.0, 10000);
    const NoiseBlock b = make_noise_block(5, 0, grid, 4);
    double acc = 0.0;
    for (double v : b.increments) acc += v * v;
    const double var = acc / static_cast<double>(b.increments.size());
    EXPECT_NEAR(var / grid.h(), 1.0, 5.0 * std::sqrt(2.0 / b.increments.size()));
}
