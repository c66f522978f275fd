#pragma once

// spde_lab subcommands. Each command validates the configuration, runs, and
// writes report.json plus one CSV per time-series suite into the output
// directory. Exit codes: 0 all enabled checks pass, 1 a check failed,
// 2 configuration or hypothesis failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "report.hpp"
#include "run_config.hpp"
#include "spdelab/spdelab.hpp"

namespace spdelab::cli {

enum ExitCode : int { kExitPass = 0, kExitSuiteFailure = 1, kExitHypothesis = 2 };

struct CommandOptions {
    std::optional<std::uint64_t> seed;  // overrides mc.master_seed
    unsigned threads = 1;
    std::optional<std::string> out;  // overrides output.directory
    std::ostream* log = &std::cout;
    std::ostream* err = &std::cerr;
};

struct Artifacts {
    OJson report;
    std::vector<std::pair<std::string, CsvTable>> tables;  // file stem, table
};

namespace detail {

inline std::uint64_t seed_of(const RunConfig& cfg, const CommandOptions& o) {
    return o.seed.value_or(cfg.mc.master_seed);
}

inline McOptions mc_of(const RunConfig& cfg, const CommandOptions& o, std::optional<std::size_t> paths = {}) {
    return McOptions{.paths = paths.value_or(cfg.mc.paths), .seed = seed_of(cfg, o), .threads = o.threads};
}

inline TimeGrid grid_to(double t_end, double h) {
    const double t = std::max(t_end, h);
    return TimeGrid(t, static_cast<std::size_t>(std::llround(t / h)));
}

inline double last_time(const std::vector<double>& ts) { return *std::max_element(ts.begin(), ts.end()); }

inline std::vector<TestFunction> test_functions(const RunConfig& cfg, std::size_t M) {
    std::vector<TestFunction> out;
    for (std::size_t i = 0; i < cfg.suite.test_functions.size(); ++i) {
        const TestFunctionConfig& f = cfg.suite.test_functions[i];
        const std::string what = "suite.test_functions[" + std::to_string(i) + "].v";
        if (f.kind == "constant") {
            out.push_back(TestFunction::constant(f.c, M));
        } else if (f.kind == "clipped_linear") {
            out.push_back(TestFunction::clipped_linear(state_from_spec(f.v, M, what), f.c));
        } else {
            out.push_back(TestFunction::exponential_linear(state_from_spec(f.v, M, what), f.c));
        }
    }
    return out;
}

inline void check_initial(const StateVector& x, const char* name) {
    if (norm_h(x) > 1.0 + kBallSlack) {
        throw ConfigError(std::string("suite.") + name + " lies outside the unit ball (|x|_H = " + fmt(norm_h(x)) + ")");
    }
}

inline OJson header(const char* command, const RunConfig& cfg, const CommandOptions& o) {
    return OJson{{"tool", "spde_lab"},
                 {"format_version", 1},
                 {"command", command},
                 {"master_seed", seed_of(cfg, o)},
                 {"paths", cfg.mc.paths},
                 {"h", cfg.grid.h}};
}

inline std::filesystem::path out_dir(const RunConfig& cfg, const CommandOptions& o) {
    return o.out.value_or(cfg.output.directory);
}

inline void write_artifacts(const Artifacts& a, const RunConfig& cfg, const CommandOptions& o) {
    const auto dir = out_dir(cfg, o);
    std::filesystem::create_directories(dir);
    if (cfg.output.wants("json")) write_text(dir / "report.json", a.report.dump(2) + "\n");
    if (cfg.output.wants("csv")) {
        for (const auto& [stem, table] : a.tables) write_text(dir / (stem + ".csv"), table.str());
    }
}

// One verification suite; appends its JSON under report["suites"] and any CSV tables.
inline bool run_suite(const SuiteRun& run, const ModelSpec& base, const RunConfig& cfg, const CommandOptions& o,
                      Artifacts& art, OJson& suites, std::optional<double>* contraction_slope = nullptr) {
    const ModelSpec m = run.noise_rank ? with_noise_rank(base, *run.noise_rank) : base;
    const StateVector x0 = state_from_spec(cfg.suite.x0, m.dim(), "suite.x0");
    const StateVector y0 = state_from_spec(cfg.suite.y0, m.dim(), "suite.y0");
    check_initial(x0, "x0");
    check_initial(y0, "y0");
    const McOptions mc = mc_of(cfg, o, run.paths);
    const std::string stem = run.name + "_" + fmt(run.name == "assumptions" ? 0.0 : last_time(run.checkpoints));
    OJson j{{"name", run.name}};
    if (run.noise_rank) j["N"] = m.noise_rank;
    if (run.paths) j["paths"] = *run.paths;
    bool pass = true;

    if (run.name == "assumptions") {
        const AssumptionReport rep = check_assumption_A(m, run.samples, mc.seed);
        const double roundtrip = sigma_roundtrip_error(m, run.samples, mc.seed);
        j["samples"] = run.samples;
        j["assumption_A"] = to_json(rep);
        j["sigma_roundtrip_max_rel_error"] = roundtrip;
        pass = rep.pass && roundtrip <= 1e-10;
        if (m.bilinear) {
            double worst = 0.0;
            for (std::size_t i = 0; i < run.samples; ++i) {
                NormalStream rng(mc.seed, StreamTag::sampling, 1'000'000 + i);
                const StateVector x = spdelab::detail::random_state(rng, m.dim());
                const StateVector y = spdelab::detail::random_state(rng, m.dim());
                const double scale = norm_v(x, m.spectrum) * norm_h(y) * norm_v(y, m.spectrum);
                if (scale > 0.0) worst = std::max(worst, std::abs(trilinear_form(m, x, y, y)) / scale);
            }
            j["trilinear_antisymmetry_max"] = worst;
            pass = pass && worst <= 1e-10;
        }
    } else if (run.name == "variational") {
        const TimeGrid grid = grid_to(last_time(run.checkpoints), cfg.grid.h);
        const VariationalSuiteReport rep = verify_variational_suite(m, x0, grid, run.probes, mc);
        j["t_end"] = grid.t_end();
        j["result"] = to_json(rep);
        pass = rep.pass;
    } else if (run.name == "contraction") {
        const TimeGrid grid = grid_to(last_time(run.checkpoints), cfg.grid.h);
        const ContractionReport rep =
            verify_contraction(m, x0, y0, grid, run.checkpoints, mc, cfg.suite.beta_factor, run.rate_slack);
        j["result"] = to_json(rep);
        art.tables.emplace_back(stem, checkpoint_csv(run.name, rep.rows));
        if (contraction_slope != nullptr) *contraction_slope = rep.fitted_log_slope;
        pass = rep.pass;
    } else if (run.name == "moment_t1") {
        const TimeGrid grid = grid_to(last_time(run.checkpoints), cfg.grid.h);
        const MomentReport rep = verify_moment_T1(m, x0, grid, run.checkpoints, run.lambda, mc);
        j["result"] = to_json(rep);
        art.tables.emplace_back(stem, checkpoint_csv(run.name, rep.rows));
        pass = rep.pass;
    } else if (run.name == "moment_t2") {
        const TimeGrid grid = grid_to(last_time(run.checkpoints), cfg.grid.h);
        const MomentReport rep = verify_moment_T2(m, x0, y0, grid, run.checkpoints, mc, cfg.suite.beta_factor);
        j["result"] = to_json(rep);
        art.tables.emplace_back(stem, checkpoint_csv(run.name, rep.rows));
        pass = rep.pass;
    } else if (run.name == "girsanov") {
        const TimeGrid grid = grid_to(last_time(run.checkpoints), cfg.grid.h);
        const auto fs = test_functions(cfg, m.dim());
        const GirsanovReport rep = verify_girsanov(m, x0, y0, grid, run.checkpoints, fs, mc, cfg.suite.beta_factor);
        j["result"] = to_json(rep);
        CsvTable t(run.name, {"t", "f", "quantity", "estimate", "std_error", "reference", "reference_std_error", "pass"});
        for (const auto& r : rep.martingale) {
            t.add({fmt(r.t), "", "E[R_t]", fmt(r.weight.mean), fmt(r.weight.std_error), "1", "0",
                   r.martingale_pass ? "1" : "0"});
        }
        for (const auto& r : rep.weak_uniqueness) {
            t.add({fmt(r.t), r.f_descriptor, "E[R_t f(Y_t)]", fmt(r.reweighted.mean), fmt(r.reweighted.std_error),
                   fmt(r.direct.mean), fmt(r.direct.std_error), r.pass ? "1" : "0"});
        }
        art.tables.emplace_back(stem, std::move(t));
        pass = rep.pass;
    } else if (run.name == "harnack") {
        const TimeGrid grid = grid_to(last_time(run.checkpoints), cfg.grid.h);
        const auto fs = test_functions(cfg, m.dim());
        require_positive_r(make_harnack_constants(m));
        const PathEnsemble ex = simulate_ensemble(m, x0, grid, run.checkpoints, mc);
        const PathEnsemble ey = x0 == y0 ? ex : simulate_ensemble(m, y0, grid, run.checkpoints, mc);
        std::vector<HarnackReport> reps = harnack_from_ensembles(m, x0, y0, ex, ey, fs);
        OJson rows = OJson::array();
        CsvTable t(run.name, {"t", "f", "case", "lhs", "lhs_std_error", "rhs_log_term", "rhs_std_error", "phi", "psi",
                              "margin", "combined_std_error", "pass"});
        auto emit = [&](const std::vector<HarnackReport>& rs, const char* label) {
            for (const auto& r : rs) {
                OJson rj = to_json(r);
                rj["case"] = label;
                rows.push_back(rj);
                t.add({fmt(r.t), r.f_descriptor, label, fmt(r.lhs.mean), fmt(r.lhs.std_error), fmt(r.rhs_log_term.mean),
                       fmt(r.rhs_log_term.std_error), fmt(r.phi_value), fmt(r.psi_value), fmt(r.margin),
                       fmt(r.combined_std_error), r.pass ? "1" : "0"});
                pass = pass && r.pass;
            }
        };
        emit(reps, "x0_y0");
        if (run.jensen_floor && !(x0 == y0)) emit(harnack_from_ensembles(m, x0, x0, ex, ex, fs), "jensen_floor");
        j["constants"] = to_json(make_harnack_constants(m));
        j["rows"] = rows;
        art.tables.emplace_back(stem, std::move(t));
    } else if (run.name == "gradient") {
        const TimeGrid grid = grid_to(run.t, cfg.grid.h);
        const auto fs = test_functions(cfg, m.dim());
        const StateVector dir = state_from_spec(run.direction, m.dim(), "suite.run.gradient.direction");
        OJson rows = OJson::array();
        CsvTable t(run.name, {"t", "f", "lhs", "lhs_std_error", "fd_error", "variance_term", "gamma_term", "rhs", "pass"});
        for (const auto& f : fs) {
            const GradientReport r = verify_gradient_estimate(m, x0, f, run.t, dir, run.fd_eps, grid, mc);
            rows.push_back(to_json(r));
            t.add({fmt(r.t), r.f_descriptor, fmt(r.lhs), fmt(r.lhs_std_error), fmt(r.fd_error), fmt(r.variance_term),
                   fmt(r.gamma_term), fmt(r.rhs), r.pass ? "1" : "0"});
            pass = pass && r.pass;
        }
        j["rows"] = rows;
        art.tables.emplace_back(stem, std::move(t));
    }
    j["pass"] = pass;
    suites.push_back(j);
    return pass;
}

}  // namespace detail

// Spectrum head, r(N) for N = 1..M-1, the smallest admissible N and the
// inequality constants for the configured N.
inline int cmd_constants(const RunConfig& cfg, const CommandOptions& o) {
    Artifacts art;
    art.report = detail::header("constants", cfg, o);
    const ModelSpec m = build_model(cfg.model);
    const HarnackConstants hc = make_harnack_constants(m);
    const auto n_min = min_N(m);
    std::ostream& out = *o.log;

    OJson rtab = OJson::array();
    CsvTable t("constants", {"N", "lambda_next", "r_N"});
    for (std::size_t n = 1; n < m.dim(); ++n) {
        const double r = compute_r(m.constants, m.spectrum.lambda(n + 1));
        rtab.push_back(OJson{{"N", n}, {"lambda_next", m.spectrum.lambda(n + 1)}, {"r_N", r}});
        t.add({std::to_string(n), fmt(m.spectrum.lambda(n + 1)), fmt(r)});
    }
    art.report["model"] = model_json(m);
    art.report["r_table"] = rtab;
    art.report["min_N"] = n_min ? OJson(*n_min) : OJson(nullptr);
    art.report["harnack_constants"] = to_json(hc);
    art.report["K_relation"] = "K_B and K_bar are stored separately; r(N) uses K_B only";
    art.tables.emplace_back("constants_0", std::move(t));

    out << "model           " << m.kind << "  M=" << m.dim() << "  N=" << m.noise_rank << "\n";
    out << "lambda[1..8]   ";
    for (std::size_t i = 0; i < std::min<std::size_t>(m.dim(), 8); ++i) out << " " << fmt(m.spectrum[i]);
    out << "\n";
    const ModelConstants& c = m.constants;
    out << "K_b=" << fmt(c.K_b) << "  K_B=" << fmt(c.K_B) << (c.K_B_empirical ? " (empirical lower bound)" : "")
        << "  K_sigma=" << fmt(c.K_sigma) << "  |b(0)|_V*=" << fmt(c.b0_vstar) << "  |sigma(0)|_HS=" << fmt(c.sigma0_hs)
        << "  |sigma^-1|_HN=" << fmt(c.sigma_inv_bound) << "\n";
    out << "   N   lambda_{N+1}   r(N)\n";
    for (std::size_t n = 1; n < m.dim(); ++n) {
        out << std::setw(4) << n << "   " << std::setw(12) << fmt(m.spectrum.lambda(n + 1)) << "   "
            << fmt(compute_r(c, m.spectrum.lambda(n + 1))) << "\n";
    }
    out << "min_N           " << (n_min ? std::to_string(*n_min) : "none") << "\n";

    std::vector<std::string> violations;
    if (!n_min) violations.push_back("no N in 1..M-1 gives r(N) > 0");
    if (hc.valid()) {
        out << "Phi coefficient " << fmt(hc.phi_coeff) << "  Psi_t = " << fmt(hc.psi_prefactor) << " exp(-"
            << fmt(hc.psi_rate) << " t) |x-y|\n";
    } else {
        violations.push_back("r(N) = " + fmt(hc.r_N) + " is not positive for N = " + std::to_string(m.noise_rank));
    }
    OJson vj = OJson::array();
    for (const auto& v : violations) {
        vj.push_back(v);
        *o.err << "hypothesis violation: " << v << "\n";
    }
    art.report["hypothesis_violations"] = vj;
    art.report["pass"] = violations.empty();
    detail::write_artifacts(art, cfg, o);
    return violations.empty() ? kExitPass : kExitHypothesis;
}

// Plain ensemble from x0: mean |X_t|_H^2 and mean int |X|_V^2 at the checkpoints.
inline int cmd_simulate(const RunConfig& cfg, const CommandOptions& o) {
    Artifacts art;
    art.report = detail::header("simulate", cfg, o);
    const ModelSpec m = build_model(cfg.model);
    const StateVector x0 = state_from_spec(cfg.suite.x0, m.dim(), "suite.x0");
    detail::check_initial(x0, "x0");
    const TimeGrid grid = detail::grid_to(detail::last_time(cfg.grid.checkpoints), cfg.grid.h);
    const McOptions mc = detail::mc_of(cfg, o);
    const PathEnsemble e = simulate_ensemble(m, x0, grid, cfg.grid.checkpoints, mc);

    CsvTable t("simulate", {"t", "mean_h_norm_sq", "std_error", "mean_v_integral", "v_integral_std_error"});
    OJson rows = OJson::array();
    std::vector<double> a(e.paths), b(e.paths);
    for (std::size_t c = 0; c < e.checkpoints; ++c) {
        for (std::size_t p = 0; p < e.paths; ++p) {
            a[p] = norm_h_squared(e.state(p, c));
            b[p] = e.v_integral[p * e.checkpoints + c];
        }
        const MeanEstimate ea = estimate_mean(a);
        const MeanEstimate eb = estimate_mean(b);
        rows.push_back(OJson{{"t", e.times[c]}, {"h_norm_sq", to_json(ea)}, {"v_integral", to_json(eb)}});
        t.add({fmt(e.times[c]), fmt(ea.mean), fmt(ea.std_error), fmt(eb.mean), fmt(eb.std_error)});
    }
    const MeanEstimate tv = estimate_mean(e.total_variation);
    art.report["model"] = model_json(m);
    art.report["x0"] = sparse_json(x0);
    art.report["rows"] = rows;
    art.report["total_variation"] = to_json(tv);
    art.report["pass"] = true;
    art.tables.emplace_back("simulate_" + fmt(grid.t_end()), std::move(t));
    detail::write_artifacts(art, cfg, o);
    *o.log << "simulated " << e.paths << " paths to t=" << fmt(grid.t_end()) << "\n";
    return kExitPass;
}

// Coupled ensemble from (x0, y0): distance process and Girsanov weight at the checkpoints.
inline int cmd_couple(const RunConfig& cfg, const CommandOptions& o) {
    Artifacts art;
    art.report = detail::header("couple", cfg, o);
    const ModelSpec m = build_model(cfg.model);
    const StateVector x0 = state_from_spec(cfg.suite.x0, m.dim(), "suite.x0");
    const StateVector y0 = state_from_spec(cfg.suite.y0, m.dim(), "suite.y0");
    detail::check_initial(x0, "x0");
    detail::check_initial(y0, "y0");
    const TimeGrid grid = detail::grid_to(detail::last_time(cfg.grid.checkpoints), cfg.grid.h);
    const McOptions mc = detail::mc_of(cfg, o);
    const CouplingEnsemble e = couple_ensemble(m, x0, y0, grid, cfg.grid.checkpoints, mc, cfg.suite.beta_factor);

    CsvTable dist("couple_distance", {"t", "mean_dist_sq", "std_error", "max_dist_h"});
    CsvTable wt("couple_weight", {"t", "mean_weight", "std_error"});
    OJson rows = OJson::array();
    std::vector<double> d(e.paths), w(e.paths);
    for (std::size_t c = 0; c < e.checkpoints; ++c) {
        double dmax = 0.0;
        for (std::size_t p = 0; p < e.paths; ++p) {
            d[p] = e.at(e.dist_sq, p, c);
            w[p] = e.at(e.weight, p, c);
            dmax = std::max(dmax, std::sqrt(d[p]));
        }
        const MeanEstimate ed = estimate_mean(d);
        const MeanEstimate ew = estimate_mean(w);
        rows.push_back(OJson{{"t", e.times[c]}, {"dist_sq", to_json(ed)}, {"max_dist_h", dmax}, {"weight", to_json(ew)}});
        dist.add({fmt(e.times[c]), fmt(ed.mean), fmt(ed.std_error), fmt(dmax)});
        wt.add({fmt(e.times[c]), fmt(ew.mean), fmt(ew.std_error)});
    }
    art.report["model"] = model_json(m);
    art.report["x0"] = sparse_json(x0);
    art.report["y0"] = sparse_json(y0);
    art.report["beta_factor"] = cfg.suite.beta_factor;
    art.report["drift_coefficient"] = coupling_drift_coefficient(m, cfg.suite.beta_factor);
    art.report["rows"] = rows;
    art.report["pass"] = true;
    art.tables.emplace_back("couple_distance_" + fmt(grid.t_end()), std::move(dist));
    art.tables.emplace_back("couple_weight_" + fmt(grid.t_end()), std::move(wt));
    detail::write_artifacts(art, cfg, o);
    *o.log << "coupled " << e.paths << " path pairs to t=" << fmt(grid.t_end()) << "\n";
    return kExitPass;
}

// Runs every suite listed under suite.run.
inline int cmd_verify(const RunConfig& cfg, const CommandOptions& o) {
    if (cfg.suite.runs.empty()) throw ConfigError("suite.run lists no suites to verify");
    Artifacts art;
    art.report = detail::header("verify", cfg, o);
    const ModelSpec m = build_model(cfg.model);
    art.report["model"] = model_json(m);
    art.report["beta_factor"] = cfg.suite.beta_factor;
    OJson suites = OJson::array();
    bool all = true;
    for (const SuiteRun& run : cfg.suite.runs) {
        const bool ok = detail::run_suite(run, m, cfg, o, art, suites);
        *o.log << (ok ? "PASS " : "FAIL ") << run.name << "\n";
        all = all && ok;
    }
    art.report["suites"] = suites;
    art.report["pass"] = all;
    detail::write_artifacts(art, cfg, o);
    return all ? kExitPass : kExitSuiteFailure;
}

// Cartesian product over (N, nu, theta, sigma rank); each cell runs the
// configured suites. Cells that violate a hypothesis are recorded, not run.
inline int cmd_sweep(const RunConfig& cfg, const CommandOptions& o) {
    if (cfg.suite.runs.empty()) throw ConfigError("suite.run lists no suites for the sweep cells");
    Artifacts art;
    art.report = detail::header("sweep", cfg, o);
    auto axis = [](const auto& values, auto fallback) {
        using T = std::decay_t<decltype(fallback)>;
        std::vector<std::optional<T>> out;
        for (const auto& v : values) out.emplace_back(v);
        if (out.empty()) out.emplace_back(std::nullopt);
        return out;
    };
    const auto Ns = axis(cfg.sweep.N, std::size_t{0});
    const auto nus = axis(cfg.sweep.nu, 0.0);
    const auto thetas = axis(cfg.sweep.theta, 0.0);
    const auto ranks = axis(cfg.sweep.sigma_rank, std::size_t{0});

    CsvTable t("sweep", {"N", "nu", "theta", "sigma_rank", "r_N", "fitted_log_slope", "status", "pass"});
    OJson cells = OJson::array();
    bool any_fail = false;
    bool any_violation = false;
    for (const auto& n : Ns) {
        for (const auto& nu : nus) {
            for (const auto& th : thetas) {
                for (const auto& rk : ranks) {
                    const ModelOverrides ov{n, nu, th, rk};
                    const double nu_v = nu.value_or(cfg.model.nu);
                    const double th_v = th.value_or(cfg.model.theta);
                    const std::size_t rk_v = rk.value_or(cfg.model.sigma.rank);
                    OJson cell{{"nu", nu_v}, {"theta", th_v}, {"sigma_rank", rk_v}};
                    std::string status = "ok";
                    bool pass = true;
                    double r_N = std::numeric_limits<double>::quiet_NaN();
                    std::optional<double> slope;
                    std::string n_text = n ? std::to_string(*n) : "min";
                    try {
                        const ModelSpec m = build_model(cfg.model, ov);
                        n_text = std::to_string(m.noise_rank);
                        r_N = make_harnack_constants(m).r_N;
                        Artifacts scratch;
                        OJson suites = OJson::array();
                        for (const SuiteRun& run : cfg.suite.runs) {
                            std::optional<double> s;
                            pass = detail::run_suite(run, m, cfg, o, scratch, suites, &s) && pass;
                            if (s) slope = s;
                        }
                        cell["suites"] = suites;
                    } catch (const HypothesisError& e) {
                        status = "hypothesis_violation";
                        pass = false;
                        cell["error"] = e.what();
                        any_violation = true;
                    }
                    if (status == "ok" && !pass) any_fail = true;
                    cell["N"] = n_text;
                    cell["r_N"] = r_N;
                    cell["fitted_log_slope"] = slope ? OJson(*slope) : OJson(nullptr);
                    cell["status"] = status;
                    cell["pass"] = pass;
                    cells.push_back(cell);
                    t.add({n_text, fmt(nu_v), fmt(th_v), std::to_string(rk_v), fmt(r_N), slope ? fmt(*slope) : "",
                           status, pass ? "1" : "0"});
                    *o.log << "cell N=" << n_text << " nu=" << fmt(nu_v) << " theta=" << fmt(th_v)
                           << " rank=" << rk_v << ": " << status << (pass ? " PASS" : " FAIL") << "\n";
                }
            }
        }
    }
    art.report["cells"] = cells;
    art.report["pass"] = !any_fail && !any_violation;
    double t_max = 0.0;
    for (const auto& run : cfg.suite.runs) t_max = std::max(t_max, detail::last_time(run.checkpoints));
    art.tables.emplace_back("sweep_" + fmt(t_max), std::move(t));
    detail::write_artifacts(art, cfg, o);
    if (any_fail) return kExitSuiteFailure;
    return any_violation ? kExitHypothesis : kExitPass;
}

// Dispatches a subcommand and maps errors to exit codes.
inline int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& o) {
    try {
        if (name == "constants") return cmd_constants(cfg, o);
        if (name == "simulate") return cmd_simulate(cfg, o);
        if (name == "couple") return cmd_couple(cfg, o);
        if (name == "verify") return cmd_verify(cfg, o);
        if (name == "sweep") return cmd_sweep(cfg, o);
        throw ConfigError("unknown command " + name);
    } catch (const HypothesisError& e) {
        *o.err << "hypothesis violation: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const ConfigError& e) {
        *o.err << "configuration error: " << e.what() << "\n";
        return kExitHypothesis;
    }
}

}  // namespace spdelab::cli
