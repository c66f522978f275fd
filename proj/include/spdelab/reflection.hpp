#pragma once

// Discrete Skorokhod reflection on the unit ball. The radial projection
// x_new = x_hat / max(1, |x_hat|) yields increments dL = x_new - x_hat with
// <phi - x_new, dL> >= 0 for every phi in D, the one-step form of the
// Riemann-Stieltjes condition on the local time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "spdelab/path_record.hpp"
#include "spdelab/philox.hpp"
#include "spdelab/spectral_space.hpp"

namespace spdelab {

struct ReflectionStep {
    BallState state;
    StateVector increment;
};

inline ReflectionStep reflect_step(const StateVector& x_hat) {
    auto [state, correction] = project_ball(x_hat);
    return {std::move(state), std::move(correction)};
}

// A continuous D-valued probe t -> P_D(a + sin(omega t + phase) c).
class BallProbe {
public:
    BallProbe(StateVector offset, StateVector swing, double omega, double phase)
        : offset_(std::move(offset)), swing_(std::move(swing)), omega_(omega), phase_(phase) {}

    static BallProbe random(NormalStream& rng, std::size_t size) {
        auto draw = [&](double radius) {
            StateVector v(size);
            rng.fill(v.coeffs());
            const double n = norm_h(v);
            if (n > 0.0) v *= radius / n;
            return v;
        };
        // Radii up to 1.5 so that a good share of probes touch the sphere.
        StateVector a = draw(1.5 * rng.uniform());
        StateVector c = draw(rng.uniform());
        const double omega = 10.0 * rng.uniform();
        const double phase = 6.283185307179586 * rng.uniform();
        return BallProbe(std::move(a), std::move(c), omega, phase);
    }

    StateVector at(double t) const {
        StateVector v = offset_;
        const double s = std::sin(omega_ * t + phase_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * swing_[i];
        return project_ball(v).state.vec();
    }

private:
    StateVector offset_;
    StateVector swing_;
    double omega_;
    double phase_;
};

struct VariationalReport {
    std::size_t probes = 0;
    double min_probe_sum = 0.0;  // min over random probes of sum <phi - X, dL>
    double zero_probe_sum = 0.0;  // phi = 0
    double self_probe_sum = 0.0;  // phi = X
    double x_dot_dl_sum = 0.0;    // sum <X, dL>, should be <= 0
    double total_variation = 0.0;
    std::size_t active_steps = 0;
    double tolerance = 0.0;  // 1e-9 Var_H(L)
    bool pass = true;
};

// Riemann-Stieltjes sums sum_k <phi(t_k) - X_{t_k}, dL_k> over random probes.
inline VariationalReport verify_variational_inequality(const PathRecord& path, std::size_t probe_paths,
                                                       std::uint64_t rng_seed, std::uint64_t path_index = 0) {
    VariationalReport rep;
    rep.probes = probe_paths;
    rep.total_variation = path.local_time.total_variation;
    rep.active_steps = path.local_time.active_steps.size();
    rep.tolerance = 1e-9 * rep.total_variation;
    const auto& dl = path.local_time.increments;
    for (std::size_t k : path.local_time.active_steps) {
        const StateVector& x = path.states[k + 1].vec();
        const double xd = inner(x, dl[k]);
        rep.x_dot_dl_sum += xd;
        rep.zero_probe_sum -= xd;
        rep.self_probe_sum += inner(x - x, dl[k]);
    }
    double min_sum = std::numeric_limits<double>::infinity();
    NormalStream rng(rng_seed, StreamTag::probes, path_index);
    const std::size_t M = path.states.front().size();
    for (std::size_t p = 0; p < probe_paths; ++p) {
        const BallProbe probe = BallProbe::random(rng, M);
        double sum = 0.0;
        for (std::size_t k : path.local_time.active_steps) {
            const StateVector phi = probe.at(path.grid.time(k + 1));
            sum += inner(phi - path.states[k + 1].vec(), dl[k]);
        }
        min_sum = std::min(min_sum, sum);
    }
    rep.min_probe_sum = probe_paths > 0 ? min_sum : 0.0;
    rep.pass = rep.min_probe_sum >= -rep.tolerance && rep.zero_probe_sum >= -rep.tolerance &&
               rep.x_dot_dl_sum <= rep.tolerance;
    return rep;
}

}  // namespace spdelab
