#pragma once

// Semi-implicit Euler-Maruyama for
//   dX = {b(X) + B(X, X) - A X} dt + sigma(X) dW + dL,  X in D,
// implicit in A, explicit in b, B and the noise (Ito), followed by one
// radial reflection per step.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spdelab/errors.hpp"
#include "spdelab/models.hpp"
#include "spdelab/path_record.hpp"
#include "spdelab/philox.hpp"
#include "spdelab/reflection.hpp"
#include "spdelab/spectral_space.hpp"

namespace spdelab {

// Brownian increments for one path: steps x width, each N(0, h).
struct NoiseBlock {
    std::size_t steps = 0;
    std::size_t width = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    StreamTag tag = StreamTag::noise;
    std::vector<double> increments;

    std::span<const double> row(std::size_t k) const { return {increments.data() + k * width, width}; }
};

inline void fill_noise_block(NoiseBlock& block, std::uint64_t master_seed, std::uint64_t path_index,
                             const TimeGrid& grid, std::size_t width, StreamTag tag = StreamTag::noise) {
    block.steps = grid.steps();
    block.width = width;
    block.master_seed = master_seed;
    block.path_index = path_index;
    block.tag = tag;
    block.increments.resize(block.steps * width);
    NormalStream rng(master_seed, tag, path_index);
    rng.fill(block.increments, std::sqrt(grid.h()));
}

inline NoiseBlock make_noise_block(std::uint64_t master_seed, std::uint64_t path_index, const TimeGrid& grid,
                                   std::size_t width, StreamTag tag = StreamTag::noise) {
    NoiseBlock block;
    fill_noise_block(block, master_seed, path_index, grid, width, tag);
    return block;
}

// Reusable work buffers for the predictor; one per path worker.
class Stepper {
public:
    explicit Stepper(const ModelSpec& m) : m_(m), drift_(m.dim()), bil_(m.dim()) {}

    const ModelSpec& model() const noexcept { return m_; }

    // x_hat = (x + h (b(x) + B(x,x) + extra) + sigma(x) dW) / (1 + h lambda), componentwise.
    void predict(const StateVector& x, std::span<const double> dW, double h, const StateVector* extra,
                 StateVector& x_hat) {
        const std::size_t M = m_.dim();
        x_hat.set_zero();
        m_.sigma_apply(x, dW, x_hat);
        if (m_.drift) {
            m_.drift(x, drift_);
            for (std::size_t i = 0; i < M; ++i) x_hat[i] += h * drift_[i];
        }
        if (m_.bilinear) {
            m_.bilinear(x, x, bil_);
            for (std::size_t i = 0; i < M; ++i) x_hat[i] += h * bil_[i];
        }
        if (extra != nullptr) {
            for (std::size_t i = 0; i < M; ++i) x_hat[i] += h * (*extra)[i];
        }
        const auto& lam = m_.spectrum;
        for (std::size_t i = 0; i < M; ++i) x_hat[i] = (x[i] + x_hat[i]) / (1.0 + h * lam[i]);
    }

    // One full step in place: x <- P_D(x_hat); dl receives the local-time increment.
    bool advance(StateVector& x, std::span<const double> dW, double h, const StateVector* extra, StateVector& dl,
                 std::size_t step_index) {
        if (scratch_.size() != x.size()) scratch_ = StateVector(x.size());
        predict(x, dW, h, extra, scratch_);
        if (!scratch_.all_finite()) throw BlowUpError(step_index, "predictor overflow");
        std::swap(x, scratch_);
        return project_ball_in_place(x, dl);
    }

private:
    const ModelSpec& m_;
    StateVector drift_;
    StateVector bil_;
    StateVector scratch_;
};

struct StepResult {
    BallState state;
    StateVector increment_L;
};

inline StepResult step(const ModelSpec& m, const BallState& x, const StateVector& dW, double h) {
    if (!(h > 0.0)) throw Error("step: h must be positive");
    require_same_size(x.size(), m.dim(), "step");
    require_same_size(dW.size(), m.noise_width, "step (noise)");
    Stepper stepper(m);
    StateVector state = x.vec();
    StateVector dl(m.dim());
    stepper.advance(state, dW.coeffs(), h, nullptr, dl, 0);
    return {BallState(std::move(state)), std::move(dl)};
}

// Drives one path, calling observer(k, state, dl, active, v_integral) for
// k = 0..steps. At k = 0, dl is zero and active is false.
template <class Observer>
void run_path(const ModelSpec& m, const StateVector& x0, const TimeGrid& grid, const NoiseBlock& noise,
              Observer&& observer) {
    require_same_size(x0.size(), m.dim(), "run_path");
    if (noise.steps != grid.steps() || noise.width != m.noise_width) {
        throw DimensionError("run_path: noise block shape does not match grid/model");
    }
    const double h = grid.h();
    Stepper stepper(m);
    StateVector x = x0;
    StateVector dl(m.dim());
    double v_int = 0.0;
    observer(std::size_t{0}, static_cast<const StateVector&>(x), static_cast<const StateVector&>(dl), false, v_int);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        v_int += h * norm_v_squared(x, m.spectrum);
        const bool active = stepper.advance(x, noise.row(k), h, nullptr, dl, k + 1);
        observer(k + 1, static_cast<const StateVector&>(x), static_cast<const StateVector&>(dl), active, v_int);
    }
}

inline PathRecord simulate_path(const ModelSpec& m, const BallState& x0, const TimeGrid& grid,
                                const NoiseBlock& noise) {
    PathRecord rec{.grid = grid};
    rec.states.reserve(grid.steps() + 1);
    rec.local_time.increments.reserve(grid.steps());
    rec.v_norm_integral.reserve(grid.steps() + 1);
    run_path(m, x0.vec(), grid, noise,
             [&](std::size_t k, const StateVector& x, const StateVector& dl, bool active, double v_int) {
                 rec.states.emplace_back(x);
                 rec.v_norm_integral.push_back(v_int);
                 rec.sup_h_norm = std::max(rec.sup_h_norm, norm_h(x));
                 if (k == 0) return;
                 rec.local_time.increments.push_back(dl);
                 if (active) {
                     rec.local_time.active_steps.push_back(k - 1);
                     rec.local_time.total_variation += norm_h(dl);
                 }
             });
    return rec;
}

// exp(lambda int_0^T |X_s|_V^2 ds) for one path; +inf on overflow.
inline double path_functional_exp_v(const PathRecord& path, double lambda) {
    if (path.v_norm_integral.empty()) throw Error("path_functional_exp_v: empty path");
    return std::exp(lambda * path.v_norm_integral.back());
}

}  // namespace spdelab
