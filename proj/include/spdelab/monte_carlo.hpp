#pragma once

// Ensemble drivers. Path i always draws noise from stream (seed, tag, i),
// and each worker writes only its own slots, so ensemble contents are
// independent of the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spdelab/coupling.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/models.hpp"
#include "spdelab/statistics.hpp"

namespace spdelab {

struct McOptions {
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Grid indices of the requested checkpoint times.
inline std::vector<std::size_t> checkpoint_indices(const TimeGrid& grid, std::span<const double> times) {
    std::vector<std::size_t> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(grid.index_of(t));
    return out;
}

// Per-path values at checkpoints, path-major: value(p, c) = data[p * C + c].
struct PathEnsemble {
    std::size_t paths = 0;
    std::size_t checkpoints = 0;
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> states;      // paths x C x M
    std::vector<double> v_integral;  // paths x C
    std::vector<double> total_variation;  // per path, over the whole grid

    StateVector state(std::size_t p, std::size_t c) const {
        const double* s = states.data() + (p * checkpoints + c) * dim;
        return StateVector(std::vector<double>(s, s + dim));
    }
};

struct CouplingEnsemble {
    std::size_t paths = 0;
    std::size_t checkpoints = 0;
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> x_states;
    std::vector<double> y_states;
    std::vector<double> dist_sq;
    std::vector<double> v_integral_x;
    std::vector<double> weight;
    std::vector<double> beta_sq;

    StateVector y_state(std::size_t p, std::size_t c) const {
        const double* s = y_states.data() + (p * checkpoints + c) * dim;
        return StateVector(std::vector<double>(s, s + dim));
    }
    StateVector x_state(std::size_t p, std::size_t c) const {
        const double* s = x_states.data() + (p * checkpoints + c) * dim;
        return StateVector(std::vector<double>(s, s + dim));
    }
    double at(const std::vector<double>& v, std::size_t p, std::size_t c) const { return v[p * checkpoints + c]; }
};

inline PathEnsemble simulate_ensemble(const ModelSpec& m, const StateVector& x0, const TimeGrid& grid,
                                      std::span<const double> times, const McOptions& mc,
                                      StreamTag tag = StreamTag::noise) {
    const auto idx = checkpoint_indices(grid, times);
    const std::size_t C = idx.size();
    const std::size_t M = m.dim();
    PathEnsemble e;
    e.paths = mc.paths;
    e.checkpoints = C;
    e.dim = M;
    e.times.assign(times.begin(), times.end());
    e.states.assign(mc.paths * C * M, 0.0);
    e.v_integral.assign(mc.paths * C, 0.0);
    e.total_variation.assign(mc.paths, 0.0);
    parallel_for(mc.paths, mc.threads, [&](std::size_t p) {
        NoiseBlock noise;
        fill_noise_block(noise, mc.seed, p, grid, m.noise_width, tag);
        double tv = 0.0;
        run_path(m, x0, grid, noise,
                 [&](std::size_t k, const StateVector& x, const StateVector& dl, bool active, double v_int) {
                     if (active) tv += norm_h(dl);
                     for (std::size_t c = 0; c < C; ++c) {
                         if (idx[c] != k) continue;
                         std::copy(x.begin(), x.end(), e.states.begin() + static_cast<std::ptrdiff_t>((p * C + c) * M));
                         e.v_integral[p * C + c] = v_int;
                     }
                 });
        e.total_variation[p] = tv;
    });
    return e;
}

inline CouplingEnsemble couple_ensemble(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                        const TimeGrid& grid, std::span<const double> times, const McOptions& mc,
                                        double beta_factor = kDefaultBetaFactor, StreamTag tag = StreamTag::noise) {
    const auto idx = checkpoint_indices(grid, times);
    const std::size_t C = idx.size();
    const std::size_t M = m.dim();
    CouplingEnsemble e;
    e.paths = mc.paths;
    e.checkpoints = C;
    e.dim = M;
    e.times.assign(times.begin(), times.end());
    e.x_states.assign(mc.paths * C * M, 0.0);
    e.y_states.assign(mc.paths * C * M, 0.0);
    e.dist_sq.assign(mc.paths * C, 0.0);
    e.v_integral_x.assign(mc.paths * C, 0.0);
    e.weight.assign(mc.paths * C, 0.0);
    e.beta_sq.assign(mc.paths * C, 0.0);
    parallel_for(mc.paths, mc.threads, [&](std::size_t p) {
        NoiseBlock noise;
        fill_noise_block(noise, mc.seed, p, grid, m.noise_width, tag);
        run_coupling(m, x0, y0, grid, noise, beta_factor, [&](std::size_t k, const CoupledSample& s) {
            for (std::size_t c = 0; c < C; ++c) {
                if (idx[c] != k) continue;
                const std::size_t slot = p * C + c;
                const auto off = static_cast<std::ptrdiff_t>(slot * M);
                std::copy(s.x.begin(), s.x.end(), e.x_states.begin() + off);
                std::copy(s.y.begin(), s.y.end(), e.y_states.begin() + off);
                e.dist_sq[slot] = norm_h_squared(s.x - s.y);
                e.v_integral_x[slot] = s.v_integral_x;
                e.weight[slot] = girsanov_weight(s.beta_dw, s.beta_sq);
                e.beta_sq[slot] = s.beta_sq;
            }
        });
    });
    return e;
}

}  // namespace spdelab
