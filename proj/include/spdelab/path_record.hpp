#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spdelab/errors.hpp"
#include "spdelab/spectral_space.hpp"

namespace spdelab {

class TimeGrid {
public:
    TimeGrid(double t_end, std::size_t steps) : t_end_(t_end), steps_(steps) {
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error("TimeGrid: t_end must be positive");
        if (steps < 1) throw Error("TimeGrid: steps must be >= 1");
    }

    // Grid with step close to `step` covering [0, t_end].
    static TimeGrid with_step(double t_end, double step) {
        if (!(step > 0.0)) throw Error("TimeGrid: step must be positive");
        return TimeGrid(t_end, static_cast<std::size_t>(std::llround(t_end / step)));
    }

    double t_end() const noexcept { return t_end_; }
    std::size_t steps() const noexcept { return steps_; }
    double h() const noexcept { return t_end_ / static_cast<double>(steps_); }
    double time(std::size_t k) const noexcept { return t_end_ * static_cast<double>(k) / static_cast<double>(steps_); }

    // Grid index of time t; t must lie on the grid.
    std::size_t index_of(double t) const {
        const double x = t / h();
        const auto k = static_cast<long long>(std::llround(x));
        if (k < 0 || static_cast<std::size_t>(k) > steps_ || std::abs(x - static_cast<double>(k)) > 1e-6) {
            throw Error("time " + std::to_string(t) + " is not a point of the grid [0, " + std::to_string(t_end_) +
                        "] with step " + std::to_string(h()));
        }
        return static_cast<std::size_t>(k);
    }

private:
    double t_end_;
    std::size_t steps_;
};

// Reflection bookkeeping for one path. increments[k] is the local-time
// increment of the transition into grid point k+1.
struct LocalTimeRecord {
    std::vector<StateVector> increments;
    double total_variation = 0.0;  // Var_H(L) = sum |dL|_H
    std::vector<std::size_t> active_steps;
};

struct PathRecord {
    TimeGrid grid;
    std::vector<BallState> states;  // steps + 1 entries
    LocalTimeRecord local_time;
    std::vector<double> v_norm_integral;  // int_0^{t_k} |X_s|_V^2 ds, left-endpoint rule
    double sup_h_norm = 0.0;
};

}  // namespace spdelab
