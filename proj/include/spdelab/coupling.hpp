#pragma once

// Coupling by change of measure. X follows the reflected equation; Y uses
// the same Brownian increments plus the drift c_N pi_N(X - Y), with
// c_N = beta_factor * lambda_{N+1}. beta = sigma(Y)^{-1} c_N pi_N(X - Y),
// so Y is the X-scheme driven by W + int beta ds, and
//   R_t = exp(-int <beta, dW> - 1/2 int |beta|^2 ds)
// turns the law of Y^y into that of X^y.

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "spdelab/errors.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/models.hpp"
#include "spdelab/statistics.hpp"
#include "spdelab/test_function.hpp"

namespace spdelab {

inline constexpr double kDefaultBetaFactor = 0.5;

struct CouplingRecord {
    TimeGrid grid;
    std::vector<double> dist_h;
    std::vector<double> beta_sq_integral;
    std::vector<double> beta_dw_integral;
    std::vector<double> girsanov_weight;
    PathRecord x_path;
    PathRecord y_path;
    double beta_sup = 0.0;
};

struct CoupledStepResult {
    BallState x;
    BallState y;
    StateVector beta;
    StateVector increment_Lx;
    StateVector increment_Ly;
};

inline double coupling_drift_coefficient(const ModelSpec& m, double beta_factor) {
    if (!(beta_factor > 0.0)) throw Error("beta_factor must be positive");
    return beta_factor * m.lambda_next();
}

// Work buffers and per-step logic shared by coupled_step and the ensemble drivers.
class CoupledStepper {
public:
    CoupledStepper(const ModelSpec& m, double beta_factor)
        : m_(m),
          c_(coupling_drift_coefficient(m, beta_factor)),
          x_step_(m),
          y_step_(m),
          extra_(m.dim()),
          beta_(m.noise_width) {}

    double drift_coefficient() const noexcept { return c_; }
    const StateVector& beta() const noexcept { return beta_; }

    // Advances (x, y) in place; returns |beta| evaluated at the pre-step states.
    double advance(StateVector& x, StateVector& y, std::span<const double> dW, double h, StateVector& dlx,
                   StateVector& dly, std::size_t step_index) {
        const std::size_t N = m_.noise_rank;
        extra_.set_zero();
        double proj_norm2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double d = x[i] - y[i];
            proj_norm2 += d * d;
            extra_[i] = c_ * d;
        }
        m_.sigma_inv_apply(y, extra_, beta_);
        const double beta_norm = norm_h(beta_);
        // |beta| <= c_N |sigma^{-1}| |pi_N(x - y)| <= 2 c_N |sigma^{-1}|
        const double bound = c_ * m_.constants.sigma_inv_bound * std::sqrt(proj_norm2);
        if (beta_norm > bound * (1.0 + 1e-12) + 1e-300 ||
            beta_norm > 2.0 * c_ * m_.constants.sigma_inv_bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "beta bound violated at step " << step_index << ": |beta|=" << beta_norm << " > " << bound
               << " (check sigma^{-1} and sigma_inv_bound)";
            throw HypothesisError(os.str());
        }
        x_step_.advance(x, dW, h, nullptr, dlx, step_index);
        y_step_.advance(y, dW, h, &extra_, dly, step_index);
        return beta_norm;
    }

private:
    const ModelSpec& m_;
    double c_;
    Stepper x_step_;
    Stepper y_step_;
    StateVector extra_;
    StateVector beta_;
};

inline CoupledStepResult coupled_step(const ModelSpec& m, const BallState& x, const BallState& y,
                                      const StateVector& dW, double h, double beta_factor = kDefaultBetaFactor) {
    if (!(h > 0.0)) throw Error("coupled_step: h must be positive");
    require_same_size(x.size(), m.dim(), "coupled_step");
    require_same_size(y.size(), m.dim(), "coupled_step");
    require_same_size(dW.size(), m.noise_width, "coupled_step (noise)");
    CoupledStepper stepper(m, beta_factor);
    StateVector xs = x.vec();
    StateVector ys = y.vec();
    StateVector dlx(m.dim());
    StateVector dly(m.dim());
    stepper.advance(xs, ys, dW.coeffs(), h, dlx, dly, 0);
    return {BallState(std::move(xs)), BallState(std::move(ys)), stepper.beta(), std::move(dlx), std::move(dly)};
}

struct CoupledSample {
    const StateVector& x;
    const StateVector& y;
    double v_integral_x;  // int |X|_V^2
    double beta_sq;       // int |beta|^2
    double beta_dw;       // int <beta, dW>
};

// observer(k, sample) for k = 0..steps.
template <class Observer>
void run_coupling(const ModelSpec& m, const StateVector& x0, const StateVector& y0, const TimeGrid& grid,
                  const NoiseBlock& noise, double beta_factor, Observer&& observer,
                  std::vector<StateVector>* dlx_out = nullptr, std::vector<StateVector>* dly_out = nullptr,
                  double* beta_sup = nullptr) {
    require_same_size(x0.size(), m.dim(), "run_coupling");
    require_same_size(y0.size(), m.dim(), "run_coupling");
    if (noise.steps != grid.steps() || noise.width != m.noise_width) {
        throw DimensionError("run_coupling: noise block shape does not match grid/model");
    }
    const double h = grid.h();
    CoupledStepper stepper(m, beta_factor);
    StateVector x = x0;
    StateVector y = y0;
    StateVector dlx(m.dim());
    StateVector dly(m.dim());
    double v_int = 0.0;
    double beta_sq = 0.0;
    double beta_dw = 0.0;
    observer(std::size_t{0}, CoupledSample{x, y, v_int, beta_sq, beta_dw});
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        v_int += h * norm_v_squared(x, m.spectrum);
        const auto dW = noise.row(k);
        const double bn = stepper.advance(x, y, dW, h, dlx, dly, k + 1);
        const StateVector& beta = stepper.beta();
        double bdw = 0.0;
        for (std::size_t i = 0; i < beta.size(); ++i) bdw += beta[i] * dW[i];
        beta_dw += bdw;
        beta_sq += h * bn * bn;
        if (beta_sup != nullptr) *beta_sup = std::max(*beta_sup, bn);
        if (dlx_out != nullptr) dlx_out->push_back(dlx);
        if (dly_out != nullptr) dly_out->push_back(dly);
        observer(k + 1, CoupledSample{x, y, v_int, beta_sq, beta_dw});
    }
}

inline double girsanov_weight(double beta_dw, double beta_sq) { return std::exp(-beta_dw - 0.5 * beta_sq); }

inline CouplingRecord simulate_coupling(const ModelSpec& m, const BallState& x0, const BallState& y0,
                                        const TimeGrid& grid, const NoiseBlock& noise,
                                        double beta_factor = kDefaultBetaFactor) {
    CouplingRecord rec{.grid = grid, .x_path = PathRecord{.grid = grid}, .y_path = PathRecord{.grid = grid}};
    std::vector<StateVector> dlx;
    std::vector<StateVector> dly;
    dlx.reserve(grid.steps());
    dly.reserve(grid.steps());
    std::vector<double> y_vint;
    double y_v = 0.0;
    run_coupling(
        m, x0.vec(), y0.vec(), grid, noise, beta_factor,
        [&](std::size_t k, const CoupledSample& s) {
            rec.dist_h.push_back(norm_h(s.x - s.y));
            rec.beta_sq_integral.push_back(s.beta_sq);
            rec.beta_dw_integral.push_back(s.beta_dw);
            rec.girsanov_weight.push_back(girsanov_weight(s.beta_dw, s.beta_sq));
            rec.x_path.states.emplace_back(s.x);
            rec.y_path.states.emplace_back(s.y);
            rec.x_path.v_norm_integral.push_back(s.v_integral_x);
            rec.x_path.sup_h_norm = std::max(rec.x_path.sup_h_norm, norm_h(s.x));
            rec.y_path.sup_h_norm = std::max(rec.y_path.sup_h_norm, norm_h(s.y));
            if (k > 0) y_v += grid.h() * norm_v_squared(rec.y_path.states[k - 1].vec(), m.spectrum);
            y_vint.push_back(y_v);
        },
        &dlx, &dly, &rec.beta_sup);
    rec.y_path.v_norm_integral = std::move(y_vint);
    auto fill_lt = [](LocalTimeRecord& lt, std::vector<StateVector>&& incs) {
        for (std::size_t k = 0; k < incs.size(); ++k) {
            const double n = norm_h(incs[k]);
            if (n > 0.0) {
                lt.active_steps.push_back(k);
                lt.total_variation += n;
            }
        }
        lt.increments = std::move(incs);
    };
    fill_lt(rec.x_path.local_time, std::move(dlx));
    fill_lt(rec.y_path.local_time, std::move(dly));
    return rec;
}

// Estimates E[R_T f(Y_T^y)] from complete coupling records.
inline MeanEstimate girsanov_reweighted_mean(const std::vector<CouplingRecord>& records, const TestFunction& f) {
    if (records.empty()) throw Error("girsanov_reweighted_mean: no records");
    std::vector<double> samples;
    samples.reserve(records.size());
    for (const auto& r : records) samples.push_back(r.girsanov_weight.back() * f.value(r.y_path.states.back().vec()));
    return estimate_mean(samples);
}

}  // namespace spdelab
