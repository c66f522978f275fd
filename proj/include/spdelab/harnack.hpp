#pragma once

// Constants of the asymptotic log-Harnack inequality
//   P_t log f(x) <= log P_t f(y) + Phi(x, y) + Psi_t(x, y) |grad log f|_inf
// and the Monte Carlo suites that check it together with its supporting
// estimates (contraction of the coupling, exponential V-moment, weighted
// fourth moment, gradient bound).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spdelab/coupling.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/models.hpp"
#include "spdelab/monte_carlo.hpp"
#include "spdelab/statistics.hpp"
#include "spdelab/test_function.hpp"

namespace spdelab {

inline constexpr double kSigmaMultiplier = 3.0;

inline double compute_r(const ModelConstants& c, double lambda_next) {
    const double kb2 = c.K_B * c.K_B;
    const double noise = c.K_sigma + c.sigma0_hs * c.sigma0_hs;
    return lambda_next - 2.0 * c.K_b - 3.0 * c.K_sigma - 2.0 * kb2 * (2.0 * c.K_b + c.b0_vstar * c.b0_vstar) -
           4.0 * kb2 * (4.0 * kb2 + 1.0) * noise;
}

// Smallest N in [1, M-1] with r(N) > 0.
inline std::optional<std::size_t> min_N(const ModelConstants& c, const Spectrum& s) {
    for (std::size_t n = 1; n + 1 <= s.size(); ++n) {
        if (compute_r(c, s.lambda(n + 1)) > 0.0) return n;
    }
    return std::nullopt;
}

inline std::optional<std::size_t> min_N(const ModelSpec& m) { return min_N(m.constants, m.spectrum); }

struct HarnackConstants {
    double r_N = 0.0;
    double K_B = 0.0;
    double lambda_next = 0.0;
    double sigma_inv_bound = 0.0;
    double phi_coeff = std::numeric_limits<double>::quiet_NaN();
    double psi_prefactor = 0.0;  // e^{K_B^2 / 2}
    double psi_rate = 0.0;       // r(N) / 2
    double lambda_cap = std::numeric_limits<double>::quiet_NaN();

    bool valid() const noexcept { return r_N > 0.0; }

    double gamma_t(double t) const { return std::exp(0.5 * (K_B * K_B - r_N * t)); }
};

inline HarnackConstants make_harnack_constants(const ModelConstants& c, double lambda_next) {
    HarnackConstants hc;
    hc.r_N = compute_r(c, lambda_next);
    hc.K_B = c.K_B;
    hc.lambda_next = lambda_next;
    hc.sigma_inv_bound = c.sigma_inv_bound;
    hc.psi_prefactor = std::exp(0.5 * c.K_B * c.K_B);
    hc.psi_rate = 0.5 * hc.r_N;
    if (hc.r_N > 0.0) {
        hc.phi_coeff = std::exp(c.K_B * c.K_B) * lambda_next * lambda_next * c.sigma_inv_bound * c.sigma_inv_bound /
                       (2.0 * hc.r_N);
        hc.lambda_cap = hc.phi_coeff;
    }
    return hc;
}

inline HarnackConstants make_harnack_constants(const ModelSpec& m) {
    return make_harnack_constants(m.constants, m.lambda_next());
}

inline void require_positive_r(const HarnackConstants& hc) {
    if (!hc.valid()) throw HypothesisError("r(N) = " + std::to_string(hc.r_N) + " is not positive");
}

inline double compute_phi(const HarnackConstants& hc, const StateVector& x, const StateVector& y) {
    require_positive_r(hc);
    return hc.phi_coeff * norm_h_squared(x - y);
}

inline double compute_psi(const HarnackConstants& hc, double t, const StateVector& x, const StateVector& y) {
    require_positive_r(hc);
    return hc.gamma_t(t) * norm_h(x - y);
}

struct CheckpointRow {
    double t = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    bool pass = true;
};

inline bool one_sided_pass(double estimate, double std_error, double bound) {
    return estimate <= bound + kSigmaMultiplier * std_error;
}

struct ContractionReport {
    double r_N = 0.0;
    double initial_dist_sq = 0.0;
    std::vector<CheckpointRow> rows;
    std::optional<double> fitted_log_slope;
    double rate_slack = 0.15;
    bool rate_pass = true;
    bool pass = true;
};

// E|X_t^x - Y_t^y|^2 <= e^{K_B^2 - r(N) t} |x - y|^2 at each checkpoint, plus
// a least-squares fit of log E|X - Y|^2 whose slope must be <= -r(N)(1 - slack).
inline ContractionReport contraction_from_ensemble(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                                   const CouplingEnsemble& e, double rate_slack = 0.15) {
    const HarnackConstants hc = make_harnack_constants(m);
    require_positive_r(hc);
    ContractionReport rep;
    rep.r_N = hc.r_N;
    rep.rate_slack = rate_slack;
    rep.initial_dist_sq = norm_h_squared(x0 - y0);
    std::vector<double> fit_t;
    std::vector<double> fit_log;
    std::vector<double> samples(e.paths);
    for (std::size_t c = 0; c < e.checkpoints; ++c) {
        for (std::size_t p = 0; p < e.paths; ++p) samples[p] = e.at(e.dist_sq, p, c);
        const MeanEstimate est = estimate_mean(samples);
        CheckpointRow row{e.times[c], est.mean, est.std_error,
                          std::exp(hc.K_B * hc.K_B - hc.r_N * e.times[c]) * rep.initial_dist_sq};
        row.pass = one_sided_pass(row.estimate, row.std_error, row.bound);
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
        if (e.times[c] > 0.0 && est.mean > 0.0) {
            fit_t.push_back(e.times[c]);
            fit_log.push_back(std::log(est.mean));
        }
    }
    if (fit_t.size() >= 2) {
        rep.fitted_log_slope = least_squares_slope(fit_t, fit_log);
        rep.rate_pass = *rep.fitted_log_slope <= -hc.r_N * (1.0 - rate_slack);
    }
    rep.pass = rep.pass && rep.rate_pass;
    return rep;
}

inline ContractionReport verify_contraction(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                            const TimeGrid& grid, std::span<const double> checkpoints,
                                            const McOptions& mc, double beta_factor = kDefaultBetaFactor,
                                            double rate_slack = 0.15) {
    require_positive_r(make_harnack_constants(m));
    const CouplingEnsemble e = couple_ensemble(m, x0, y0, grid, checkpoints, mc, beta_factor);
    return contraction_from_ensemble(m, x0, y0, e, rate_slack);
}

struct MomentReport {
    std::string name;
    double lambda = 0.0;  // T1 exponent; unused for T2
    std::vector<CheckpointRow> rows;
    bool overflow = false;
    bool pass = true;
};

inline double moment_T1_bound(const ModelConstants& c, double lambda, double t) {
    const double drift = 2.0 * c.K_b + c.b0_vstar * c.b0_vstar;
    const double noise = (4.0 * lambda + 2.0) * (c.K_sigma + c.sigma0_hs * c.sigma0_hs);
    return std::exp(lambda + lambda * (drift + noise) * t);
}

inline MomentReport moment_T1_from_ensemble(const ModelSpec& m, const PathEnsemble& e, double lambda) {
    MomentReport rep{.name = "moment_t1", .lambda = lambda};
    std::vector<double> samples(e.paths);
    for (std::size_t c = 0; c < e.checkpoints; ++c) {
        for (std::size_t p = 0; p < e.paths; ++p) {
            samples[p] = std::exp(lambda * e.v_integral[p * e.checkpoints + c]);
            rep.overflow = rep.overflow || !std::isfinite(samples[p]);
        }
        const MeanEstimate est = estimate_mean(samples);
        CheckpointRow row{e.times[c], est.mean, est.std_error, moment_T1_bound(m.constants, lambda, e.times[c])};
        row.pass = std::isfinite(row.estimate) && one_sided_pass(row.estimate, row.std_error, row.bound);
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    rep.pass = rep.pass && !rep.overflow;
    return rep;
}

// E exp(lambda int_0^t |X_s|_V^2 ds) against its closed-form bound.
inline MomentReport verify_moment_T1(const ModelSpec& m, const StateVector& x0, const TimeGrid& grid,
                                     std::span<const double> checkpoints, double lambda, const McOptions& mc) {
    if (!(lambda > 0.0)) throw Error("verify_moment_T1: lambda must be positive");
    const PathEnsemble e = simulate_ensemble(m, x0, grid, checkpoints, mc);
    return moment_T1_from_ensemble(m, e, lambda);
}

inline double moment_T2_bound(const ModelSpec& m, double t, double initial_dist) {
    const ModelConstants& c = m.constants;
    const double d2 = initial_dist * initial_dist;
    return std::exp((4.0 * c.K_b + 6.0 * c.K_sigma - 2.0 * m.lambda_next()) * t) * d2 * d2;
}

inline MomentReport moment_T2_from_ensemble(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                            const CouplingEnsemble& e) {
    MomentReport rep{.name = "moment_t2"};
    const double kb2 = m.constants.K_B * m.constants.K_B;
    const double dist0 = norm_h(x0 - y0);
    std::vector<double> samples(e.paths);
    for (std::size_t c = 0; c < e.checkpoints; ++c) {
        for (std::size_t p = 0; p < e.paths; ++p) {
            const double d2 = e.at(e.dist_sq, p, c);
            // Weight uses the V-norm integral, matching the statement of the estimate.
            samples[p] = std::exp(-2.0 * kb2 * e.at(e.v_integral_x, p, c)) * d2 * d2;
        }
        const MeanEstimate est = estimate_mean(samples);
        CheckpointRow row{e.times[c], est.mean, est.std_error, moment_T2_bound(m, e.times[c], dist0)};
        row.pass = one_sided_pass(row.estimate, row.std_error, row.bound);
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

inline MomentReport verify_moment_T2(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                     const TimeGrid& grid, std::span<const double> checkpoints, const McOptions& mc,
                                     double beta_factor = kDefaultBetaFactor) {
    const CouplingEnsemble e = couple_ensemble(m, x0, y0, grid, checkpoints, mc, beta_factor);
    return moment_T2_from_ensemble(m, x0, y0, e);
}

struct HarnackReport {
    double t = 0.0;
    StateVector x0;
    StateVector y0;
    std::string f_descriptor;
    MeanEstimate lhs;           // P_t log f(x)
    MeanEstimate rhs_log_term;  // log P_t f(y), std error by the delta method
    double phi_value = 0.0;
    double psi_value = 0.0;
    double grad_log_sup = 0.0;
    double combined_std_error = 0.0;
    double margin = 0.0;  // log P_t f(y) + Phi + Psi |grad log f| - P_t log f(x)
    bool pass = true;
};

// Evaluates the inequality on two ensembles started at x0 and y0. Both
// ensembles should share noise (common random numbers).
inline std::vector<HarnackReport> harnack_from_ensembles(const ModelSpec& m, const StateVector& x0,
                                                         const StateVector& y0, const PathEnsemble& ex,
                                                         const PathEnsemble& ey,
                                                         const std::vector<TestFunction>& fs) {
    const HarnackConstants hc = make_harnack_constants(m);
    require_positive_r(hc);
    std::vector<HarnackReport> out;
    std::vector<double> lhs_s(ex.paths);
    std::vector<double> rhs_s(ey.paths);
    for (const TestFunction& f : fs) {
        for (std::size_t c = 0; c < ex.checkpoints; ++c) {
            for (std::size_t p = 0; p < ex.paths; ++p) lhs_s[p] = f.log_value(ex.state(p, c));
            for (std::size_t p = 0; p < ey.paths; ++p) rhs_s[p] = f.value(ey.state(p, c));
            HarnackReport r;
            r.t = ex.times[c];
            r.x0 = x0;
            r.y0 = y0;
            r.f_descriptor = f.descriptor();
            r.lhs = estimate_mean(lhs_s);
            const MeanEstimate pf = estimate_mean(rhs_s);
            r.rhs_log_term = {std::log(pf.mean), pf.std_error / pf.mean, pf.count};
            r.phi_value = compute_phi(hc, x0, y0);
            r.psi_value = compute_psi(hc, r.t, x0, y0);
            r.grad_log_sup = f.grad_log_sup();
            r.combined_std_error = combined_std_error(r.lhs.std_error, r.rhs_log_term.std_error);
            r.margin = r.rhs_log_term.mean + r.phi_value + r.psi_value * r.grad_log_sup - r.lhs.mean;
            r.pass = r.margin >= -kSigmaMultiplier * r.combined_std_error;
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline std::vector<HarnackReport> verify_harnack(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                                 const TimeGrid& grid, std::span<const double> t_list,
                                                 const std::vector<TestFunction>& fs, const McOptions& mc) {
    require_positive_r(make_harnack_constants(m));
    const PathEnsemble ex = simulate_ensemble(m, x0, grid, t_list, mc);
    const PathEnsemble ey = x0 == y0 ? ex : simulate_ensemble(m, y0, grid, t_list, mc);
    return harnack_from_ensembles(m, x0, y0, ex, ey, fs);
}

struct GirsanovRow {
    double t = 0.0;
    MeanEstimate weight;  // E[R_t]
    bool martingale_pass = true;
};

struct WeakUniquenessRow {
    double t = 0.0;
    std::string f_descriptor;
    MeanEstimate reweighted;  // E[R_t f(Y_t^y)]
    MeanEstimate direct;      // E[f(X_t^y)], independent noise
    double difference = 0.0;
    double combined_std_error = 0.0;
    bool pass = true;
};

struct GirsanovReport {
    double beta_factor = kDefaultBetaFactor;
    std::vector<GirsanovRow> martingale;
    std::vector<WeakUniquenessRow> weak_uniqueness;
    bool pass = true;
};

inline GirsanovReport girsanov_from_ensembles(const CouplingEnsemble& coupled, const PathEnsemble& direct,
                                              const std::vector<TestFunction>& fs, double beta_factor) {
    GirsanovReport rep;
    rep.beta_factor = beta_factor;
    std::vector<double> s(coupled.paths);
    for (std::size_t c = 0; c < coupled.checkpoints; ++c) {
        for (std::size_t p = 0; p < coupled.paths; ++p) s[p] = coupled.at(coupled.weight, p, c);
        GirsanovRow row{coupled.times[c], estimate_mean(s)};
        row.martingale_pass = std::abs(row.weight.mean - 1.0) <= kSigmaMultiplier * row.weight.std_error;
        rep.pass = rep.pass && row.martingale_pass;
        rep.martingale.push_back(row);
    }
    std::vector<double> d(direct.paths);
    for (const TestFunction& f : fs) {
        for (std::size_t c = 0; c < coupled.checkpoints; ++c) {
            for (std::size_t p = 0; p < coupled.paths; ++p) {
                s[p] = coupled.at(coupled.weight, p, c) * f.value(coupled.y_state(p, c));
            }
            for (std::size_t p = 0; p < direct.paths; ++p) d[p] = f.value(direct.state(p, c));
            WeakUniquenessRow row;
            row.t = coupled.times[c];
            row.f_descriptor = f.descriptor();
            row.reweighted = estimate_mean(s);
            row.direct = estimate_mean(d);
            row.difference = row.reweighted.mean - row.direct.mean;
            row.combined_std_error = combined_std_error(row.reweighted.std_error, row.direct.std_error);
            row.pass = std::abs(row.difference) <= kSigmaMultiplier * row.combined_std_error;
            rep.pass = rep.pass && row.pass;
            rep.weak_uniqueness.push_back(row);
        }
    }
    return rep;
}

// Martingale property of R_t and E[R_t f(Y_t^y)] = E[f(X_t^y)]; the direct
// ensemble uses noise independent of the coupled one.
inline GirsanovReport verify_girsanov(const ModelSpec& m, const StateVector& x0, const StateVector& y0,
                                      const TimeGrid& grid, std::span<const double> checkpoints,
                                      const std::vector<TestFunction>& fs, const McOptions& mc,
                                      double beta_factor = kDefaultBetaFactor) {
    const CouplingEnsemble coupled = couple_ensemble(m, x0, y0, grid, checkpoints, mc, beta_factor);
    const PathEnsemble direct = simulate_ensemble(m, y0, grid, checkpoints, mc, StreamTag::independent_noise);
    return girsanov_from_ensembles(coupled, direct, fs, beta_factor);
}

struct GradientReport {
    double t = 0.0;
    std::string f_descriptor;
    double fd_eps = 0.0;
    double lhs = 0.0;  // |d/de P_t f(x0 + e u)| by central differences
    double lhs_std_error = 0.0;
    double fd_error = 0.0;      // Richardson estimate |D(eps) - D(2 eps)| / 3
    double variance_term = 0.0;  // sqrt(2 Lambda) sqrt(P_t f^2 - (P_t f)^2)
    double gamma_term = 0.0;     // |grad f|_inf Gamma_t
    double rhs = 0.0;
    bool pass = true;
};

inline GradientReport verify_gradient_estimate(const ModelSpec& m, const StateVector& x0, const TestFunction& f,
                                               double t, const StateVector& direction, double fd_eps,
                                               const TimeGrid& grid, const McOptions& mc) {
    const HarnackConstants hc = make_harnack_constants(m);
    require_positive_r(hc);
    if (!(fd_eps > 0.0)) throw Error("verify_gradient_estimate: fd_eps must be positive");
    StateVector u = direction;
    const double un = norm_h(u);
    if (un == 0.0) throw Error("verify_gradient_estimate: zero direction");
    u *= 1.0 / un;
    auto shifted = [&](double s) {
        StateVector p = x0 + (s * fd_eps) * u;
        if (norm_h(p) > 1.0) throw Error("verify_gradient_estimate: x0 +/- 2 fd_eps direction leaves D");
        return p;
    };
    const std::vector<double> times{t};
    const StateVector xp2 = shifted(2.0), xp1 = shifted(1.0), xm1 = shifted(-1.0), xm2 = shifted(-2.0);
    const PathEnsemble e0 = simulate_ensemble(m, x0, grid, times, mc);
    const PathEnsemble ep1 = simulate_ensemble(m, xp1, grid, times, mc);
    const PathEnsemble em1 = simulate_ensemble(m, xm1, grid, times, mc);
    const PathEnsemble ep2 = simulate_ensemble(m, xp2, grid, times, mc);
    const PathEnsemble em2 = simulate_ensemble(m, xm2, grid, times, mc);

    std::vector<double> d1(mc.paths), d2(mc.paths), fv(mc.paths), f2(mc.paths);
    for (std::size_t p = 0; p < mc.paths; ++p) {
        d1[p] = (f.value(ep1.state(p, 0)) - f.value(em1.state(p, 0))) / (2.0 * fd_eps);
        d2[p] = (f.value(ep2.state(p, 0)) - f.value(em2.state(p, 0))) / (4.0 * fd_eps);
        fv[p] = f.value(e0.state(p, 0));
        f2[p] = fv[p] * fv[p];
    }
    const MeanEstimate D1 = estimate_mean(d1);
    const MeanEstimate D2 = estimate_mean(d2);
    const double pf = estimate_mean(fv).mean;
    const double pf2 = estimate_mean(f2).mean;

    GradientReport rep;
    rep.t = t;
    rep.f_descriptor = f.descriptor();
    rep.fd_eps = fd_eps;
    rep.lhs = std::abs(D1.mean);
    rep.lhs_std_error = D1.std_error;
    rep.fd_error = std::abs(D1.mean - D2.mean) / 3.0;
    rep.variance_term = std::sqrt(2.0 * hc.lambda_cap) * std::sqrt(std::max(0.0, pf2 - pf * pf));
    rep.gamma_term = f.grad_sup() * hc.gamma_t(t);
    rep.rhs = rep.variance_term + rep.gamma_term;
    rep.pass = rep.lhs <= rep.rhs + kSigmaMultiplier * rep.lhs_std_error + rep.fd_error;
    return rep;
}

struct VariationalSuiteReport {
    std::size_t paths = 0;
    std::size_t probes = 0;
    std::size_t paths_with_contact = 0;
    double worst_normalized_probe_sum = 0.0;  // min over paths of min_probe_sum / max(Var, tiny)
    double worst_normalized_x_dot_dl = 0.0;   // max over paths of sum <X, dL> / max(Var, tiny)
    double max_total_variation = 0.0;
    double mean_total_variation = 0.0;
    double second_moment_total_variation = 0.0;
    bool pass = true;
};

// Simulates `paths` complete trajectories and checks the discrete
// variational inequality on each with `probes` random probes.
inline VariationalSuiteReport verify_variational_suite(const ModelSpec& m, const StateVector& x0,
                                                       const TimeGrid& grid, std::size_t probes,
                                                       const McOptions& mc) {
    std::vector<VariationalReport> per(mc.paths);
    parallel_for(mc.paths, mc.threads, [&](std::size_t p) {
        const NoiseBlock noise = make_noise_block(mc.seed, p, grid, m.noise_width);
        const PathRecord path = simulate_path(m, BallState(x0), grid, noise);
        per[p] = verify_variational_inequality(path, probes, mc.seed, p);
    });
    VariationalSuiteReport rep;
    rep.paths = mc.paths;
    rep.probes = probes;
    std::vector<double> tv(mc.paths), tv2(mc.paths);
    double worst_probe = std::numeric_limits<double>::infinity();
    double worst_xdl = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < mc.paths; ++p) {
        const VariationalReport& r = per[p];
        rep.pass = rep.pass && r.pass;
        if (r.active_steps > 0) ++rep.paths_with_contact;
        const double scale = std::max(r.total_variation, std::numeric_limits<double>::min());
        if (r.active_steps > 0) {
            worst_probe = std::min(worst_probe, r.min_probe_sum / scale);
            worst_xdl = std::max(worst_xdl, r.x_dot_dl_sum / scale);
        }
        tv[p] = r.total_variation;
        tv2[p] = r.total_variation * r.total_variation;
        rep.max_total_variation = std::max(rep.max_total_variation, r.total_variation);
    }
    // Without contact the normalised values are undefined; report the worst over paths with contact.
    rep.worst_normalized_probe_sum = rep.paths_with_contact > 0 ? worst_probe : 0.0;
    rep.worst_normalized_x_dot_dl = rep.paths_with_contact > 0 ? worst_xdl : 0.0;
    rep.mean_total_variation = estimate_mean(tv).mean;
    rep.second_moment_total_variation = estimate_mean(tv2).mean;
    rep.pass = rep.pass && std::isfinite(rep.second_moment_total_variation);
    return rep;
}

}  // namespace spdelab
