#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spdelab/errors.hpp"
#include "spdelab/philox.hpp"
#include "spdelab/spectral_space.hpp"

namespace spdelab {

class FourierBasis;

struct ModelConstants {
    double K_b = 0.0;
    double K_B = 0.0;
    double K_sigma = 0.0;
    // Constant of the trilinear bound |B(x,y,z)| <= K |y|_V sqrt(|x|_H |x|_V |z|_H |z|_V).
    double K_bar = 0.0;
    double b0_vstar = 0.0;
    double sigma0_hs = 0.0;
    double sigma_inv_bound = std::numeric_limits<double>::infinity();
    double nu = 0.0;
    double theta = 0.0;
    int d = 0;
    // True when K_B / K_bar are sampled lower bounds rather than exact values.
    bool K_B_empirical = false;
    bool K_bar_empirical = false;
};

// out = b(x)
using DriftFn = std::function<void(const StateVector& x, StateVector& out)>;
// out = B(u, v)
using BilinearFn = std::function<void(const StateVector& u, const StateVector& v, StateVector& out)>;
// out = g with <B(u, v), z> = <u, g> for all u
using BilinearAdjointFn = std::function<void(const StateVector& v, const StateVector& z, StateVector& out)>;
// out += sigma(x) noise; noise has noise_width coordinates
using SigmaFn = std::function<void(const StateVector& x, std::span<const double> noise, StateVector& out)>;
// out (noise_width coordinates) = sigma^{-1}(x) target, target supported on modes 1..N
using SigmaInvFn = std::function<void(const StateVector& x, const StateVector& target, StateVector& out)>;

struct ModelSpec {
    std::string kind;
    Spectrum spectrum;
    std::size_t noise_rank = 1;
    // Number of leading Brownian coordinates sigma reads; the rest are killed by sigma.
    std::size_t noise_width = 0;
    DriftFn drift;                       // empty: b = 0
    BilinearFn bilinear;                 // empty: B = 0
    BilinearAdjointFn bilinear_adjoint;  // optional
    SigmaFn sigma_apply;
    SigmaInvFn sigma_inv_apply;
    ModelConstants constants;
    std::vector<double> sigma_diag;  // state-independent diagonal sigma; empty for other models
    double drift_scale = 0.0;        // linear model only
    std::shared_ptr<const FourierBasis> fourier;

    std::size_t dim() const noexcept { return spectrum.size(); }
    double lambda_next() const { return spectrum.lambda(noise_rank + 1); }
};

inline StateVector drift_b(const ModelSpec& m, const StateVector& x) {
    require_same_size(x.size(), m.dim(), "drift_b");
    StateVector out(m.dim());
    if (m.drift) m.drift(x, out);
    return out;
}

inline StateVector bilinear_B(const ModelSpec& m, const StateVector& u, const StateVector& v) {
    require_same_size(u.size(), m.dim(), "bilinear_B");
    require_same_size(v.size(), m.dim(), "bilinear_B");
    StateVector out(m.dim());
    if (m.bilinear) m.bilinear(u, v, out);
    return out;
}

inline StateVector sigma_apply(const ModelSpec& m, const StateVector& x, std::span<const double> noise) {
    require_same_size(noise.size(), m.noise_width, "sigma_apply");
    StateVector out(m.dim());
    m.sigma_apply(x, noise, out);
    return out;
}

inline StateVector sigma_inv_apply(const ModelSpec& m, const StateVector& x, const StateVector& target) {
    require_same_size(target.size(), m.dim(), "sigma_inv_apply");
    StateVector out(m.noise_width);
    m.sigma_inv_apply(x, target, out);
    return out;
}

// B(x, y, z) = <B(x, y), z>
inline double trilinear_form(const ModelSpec& m, const StateVector& x, const StateVector& y, const StateVector& z) {
    require_same_size(z.size(), m.dim(), "trilinear_form");
    if (!m.bilinear) return 0.0;
    return inner(bilinear_B(m, x, y), z);
}

// sigma_i = lambda_i^{-alpha} for i <= rank, zero above.
inline std::vector<double> sigma_power_rule(const Spectrum& s, double alpha, std::size_t rank) {
    std::vector<double> out(s.size(), 0.0);
    for (std::size_t i = 0; i < std::min(rank, s.size()); ++i) out[i] = std::pow(s[i], -alpha);
    return out;
}

namespace detail {

// Installs the diagonal sigma closures and the sigma-derived constants from
// m.sigma_diag and m.noise_rank.
inline void install_diagonal_sigma(ModelSpec& m) {
    const std::size_t M = m.dim();
    const std::size_t N = m.noise_rank;
    if (m.sigma_diag.size() != M) {
        throw DimensionError("sigma diagonal has " + std::to_string(m.sigma_diag.size()) +
                             " entries, expected M=" + std::to_string(M));
    }
    if (N < 1 || N >= M) {
        throw Error("noise rank N=" + std::to_string(N) + " must satisfy 1 <= N <= M-1 (M=" + std::to_string(M) + ")");
    }
    double hs = 0.0;
    double inv_bound = 0.0;
    std::size_t width = N;
    for (std::size_t i = 0; i < M; ++i) {
        const double s = m.sigma_diag[i];
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw Error("sigma diagonal entry " + std::to_string(i + 1) + " must be finite and nonnegative");
        }
        if (i < N) {
            if (s == 0.0) {
                throw HypothesisError("sigma diagonal entry " + std::to_string(i + 1) +
                                      " is zero inside H_N (noise rank " + std::to_string(N) + ")");
            }
            inv_bound = std::max(inv_bound, 1.0 / s);
        }
        if (s > 0.0) width = std::max(width, i + 1);
        hs += s * s;
    }
    m.noise_width = width;
    m.constants.K_sigma = 0.0;
    m.constants.sigma0_hs = std::sqrt(hs);
    m.constants.sigma_inv_bound = inv_bound;

    auto diag = std::make_shared<const std::vector<double>>(m.sigma_diag);
    m.sigma_apply = [diag, width](const StateVector&, std::span<const double> noise, StateVector& out) {
        const auto& s = *diag;
        for (std::size_t i = 0; i < width; ++i) out[i] += s[i] * noise[i];
    };
    m.sigma_inv_apply = [diag, N](const StateVector&, const StateVector& target, StateVector& out) {
        const auto& s = *diag;
        out.set_zero();
        for (std::size_t i = 0; i < N; ++i) out[i] = target[i] / s[i];
    };
}

}  // namespace detail

// b(x) = -drift_scale * x, B = 0, sigma = diag(sigma_diag).
inline ModelSpec make_linear_model(Spectrum spectrum, std::size_t noise_rank, double drift_scale,
                                   std::vector<double> sigma_diag) {
    if (!std::isfinite(drift_scale)) throw Error("make_linear_model: drift scale must be finite");
    ModelSpec m{.kind = "linear", .spectrum = std::move(spectrum), .noise_rank = noise_rank};
    m.sigma_diag = std::move(sigma_diag);
    m.drift_scale = drift_scale;
    if (drift_scale != 0.0) {
        m.drift = [drift_scale](const StateVector& x, StateVector& out) {
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = -drift_scale * x[i];
        };
    }
    // |b(x) - b(y)|_{V*} = |s| |x - y|_{V*} <= |s| / sqrt(lambda_1) |x - y|_H
    m.constants.K_b = std::abs(drift_scale) / std::sqrt(m.spectrum[0]);
    m.constants.b0_vstar = 0.0;
    m.constants.K_B = 0.0;
    m.constants.K_bar = 0.0;
    detail::install_diagonal_sigma(m);
    return m;
}

// Same model with a different noise rank N; only defined for diagonal sigma.
inline ModelSpec with_noise_rank(ModelSpec m, std::size_t noise_rank) {
    if (m.sigma_diag.empty()) throw Error("with_noise_rank: model has no diagonal sigma");
    m.noise_rank = noise_rank;
    detail::install_diagonal_sigma(m);
    return m;
}

// Largest N such that sigma is invertible on H_N; 0 when sigma_1 = 0.
inline std::size_t max_admissible_noise_rank(const ModelSpec& m) {
    if (m.sigma_diag.empty()) return m.noise_rank;
    std::size_t n = 0;
    while (n < m.sigma_diag.size() && m.sigma_diag[n] > 0.0) ++n;
    return n;
}

namespace detail {

inline StateVector random_state(NormalStream& rng, std::size_t size) {
    StateVector v(size);
    rng.fill(v.coeffs());
    return v;
}

// Random point of D: Gaussian direction, radius spread over (0, 1].
inline StateVector random_ball_point(NormalStream& rng, std::size_t size) {
    StateVector v = random_state(rng, size);
    const double n = norm_h(v);
    const double r = rng.uniform();
    if (n > 0.0) v *= r / n;
    return v;
}

inline StateVector scale_by_power(const StateVector& x, const Spectrum& s, double power) {
    StateVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * std::pow(s[i], power);
    return out;
}

inline void normalize(StateVector& x) {
    const double n = norm_h(x);
    if (n > 0.0) x *= 1.0 / n;
}

inline double bound_ratio(const ModelSpec& m, const StateVector& u, const StateVector& v) {
    const double den = norm_h(u) * norm_v(v, m.spectrum);
    if (den == 0.0) return -1.0;
    return norm_v_star(bilinear_B(m, u, v), m.spectrum) / den;
}

}  // namespace detail

// Sampled lower bound of the smallest K with |B(u,v)|_{V*} <= K |u|_H |v|_V.
// Each sample is refined by alternating power iterations on the two linear
// maps v -> B(u, v) and u -> B(u, v), so the estimate sits at a local
// maximum of the ratio rather than at a typical random value.
inline double estimate_K_B(const ModelSpec& m, std::size_t sample_count, std::uint64_t seed,
                           std::size_t ascent_rounds = 6) {
    if (sample_count < 1) throw Error("estimate_K_B: sample_count must be >= 1");
    if (!m.bilinear) return 0.0;
    const Spectrum& s = m.spectrum;
    const std::size_t M = m.dim();
    double best = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        NormalStream rng(seed, StreamTag::sampling, i);
        StateVector u = detail::random_state(rng, M);
        StateVector v = detail::random_state(rng, M);
        best = std::max(best, detail::bound_ratio(m, u, v));
        for (std::size_t round = 0; round < ascent_rounds; ++round) {
            // v-step in w = A^{1/2} v, adjoint of v -> B(u, v) is z -> -B(u, z).
            StateVector w = detail::scale_by_power(v, s, 0.5);
            for (int it = 0; it < 3; ++it) {
                detail::normalize(w);
                StateVector gw = detail::scale_by_power(bilinear_B(m, u, detail::scale_by_power(w, s, -0.5)), s, -0.5);
                w = detail::scale_by_power(bilinear_B(m, u, detail::scale_by_power(gw, s, -0.5)), s, -0.5);
                w *= -1.0;
            }
            v = detail::scale_by_power(w, s, -0.5);
            best = std::max(best, detail::bound_ratio(m, u, v));
            if (m.bilinear_adjoint) {
                for (int it = 0; it < 3; ++it) {
                    detail::normalize(u);
                    StateVector su = detail::scale_by_power(bilinear_B(m, u, v), s, -0.5);
                    StateVector next(M);
                    m.bilinear_adjoint(v, detail::scale_by_power(su, s, -0.5), next);
                    u = std::move(next);
                }
                best = std::max(best, detail::bound_ratio(m, u, v));
            }
        }
    }
    return best;
}

// Sampled lower bound of the trilinear constant K.
inline double estimate_K_bar(const ModelSpec& m, std::size_t sample_count, std::uint64_t seed) {
    if (!m.bilinear) return 0.0;
    const Spectrum& s = m.spectrum;
    double best = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        NormalStream rng(seed ^ 0x5bd1e995u, StreamTag::sampling, i);
        const StateVector x = detail::random_state(rng, m.dim());
        const StateVector y = detail::random_state(rng, m.dim());
        const StateVector z = detail::random_state(rng, m.dim());
        const double den = norm_v(y, s) * std::sqrt(norm_h(x) * norm_v(x, s) * norm_h(z) * norm_v(z, s));
        if (den == 0.0) continue;
        best = std::max(best, std::abs(trilinear_form(m, x, y, z)) / den);
    }
    return best;
}

struct AssumptionCheck {
    std::string name;
    double max_observed = 0.0;
    double constant = 0.0;
    bool pass = true;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool pass = true;
};

// Samples pairs in D and compares observed ratios against the stored constants.
inline AssumptionReport check_assumption_A(const ModelSpec& m, std::size_t sample_count, std::uint64_t seed) {
    const Spectrum& s = m.spectrum;
    const std::size_t M = m.dim();
    const std::size_t W = m.noise_width;
    const ModelConstants& c = m.constants;
    AssumptionCheck b_lip{"b_lipschitz", 0.0, c.K_b};
    AssumptionCheck s_lip{"sigma_lipschitz", 0.0, c.K_sigma};
    AssumptionCheck b_bound{"B_bound", 0.0, c.K_B};
    AssumptionCheck b_zero{"b0_vstar", 0.0, c.b0_vstar};
    AssumptionCheck s_zero{"sigma0_hs", 0.0, c.sigma0_hs};
    AssumptionCheck s_inv{"sigma_inv_bound", 0.0, c.sigma_inv_bound};

    auto hs_column = [&](const StateVector& x, std::size_t j) {
        std::vector<double> e(W, 0.0);
        e[j] = 1.0;
        return sigma_apply(m, x, e);
    };
    const StateVector zero(M);
    {
        b_zero.max_observed = norm_v_star(drift_b(m, zero), s);
        double hs = 0.0;
        for (std::size_t j = 0; j < W; ++j) hs += norm_h_squared(hs_column(zero, j));
        s_zero.max_observed = std::sqrt(hs);
    }
    for (std::size_t i = 0; i < sample_count; ++i) {
        NormalStream rng(seed, StreamTag::sampling, i);
        const StateVector x = detail::random_ball_point(rng, M);
        const StateVector y = detail::random_ball_point(rng, M);
        const double dxy = norm_h(x - y);
        if (dxy > 0.0) {
            b_lip.max_observed = std::max(b_lip.max_observed, norm_v_star(drift_b(m, x) - drift_b(m, y), s) / dxy);
            double hs = 0.0;
            for (std::size_t j = 0; j < W; ++j) hs += norm_h_squared(hs_column(x, j) - hs_column(y, j));
            s_lip.max_observed = std::max(s_lip.max_observed, hs / (dxy * dxy));
        }
        const double den = norm_h(x) * norm_v(x, s);
        if (den > 0.0) {
            b_bound.max_observed = std::max(b_bound.max_observed, norm_v_star(bilinear_B(m, x, x), s) / den);
        }
        const StateVector target = project_modes(detail::random_state(rng, M), m.noise_rank);
        const double tn = norm_h(target);
        if (tn > 0.0) s_inv.max_observed = std::max(s_inv.max_observed, norm_h(sigma_inv_apply(m, x, target)) / tn);
    }
    AssumptionReport report;
    for (AssumptionCheck* chk : {&b_lip, &s_lip, &b_bound, &b_zero, &s_zero, &s_inv}) {
        chk->pass = chk->max_observed <= chk->constant * (1.0 + 1e-9) + 1e-12;
        report.pass = report.pass && chk->pass;
        report.checks.push_back(*chk);
    }
    return report;
}

// Max relative error of sigma(x) sigma^{-1}(x) y = y over sampled y in H_N.
inline double sigma_roundtrip_error(const ModelSpec& m, std::size_t sample_count, std::uint64_t seed) {
    double worst = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        NormalStream rng(seed, StreamTag::sampling, i);
        const StateVector x = detail::random_ball_point(rng, m.dim());
        const StateVector y = project_modes(detail::random_state(rng, m.dim()), m.noise_rank);
        const StateVector pre = sigma_inv_apply(m, x, y);
        const StateVector back = sigma_apply(m, x, pre.coeffs());
        const double ny = norm_h(y);
        if (ny > 0.0) worst = std::max(worst, norm_h(back - y) / ny);
    }
    return worst;
}

}  // namespace spdelab
