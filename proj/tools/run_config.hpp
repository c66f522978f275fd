#pragma once

// Run configuration for spde_lab. The file is JSON; every field is checked
// before anything is simulated and all problems are reported together in a
// single ConfigError.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdelab/spdelab.hpp"

namespace spdelab::cli {

using Json = nlohmann::json;

struct SigmaRule {
    // "power": sigma_i = lambda_i^{-alpha} for i <= rank; "values": explicit list.
    std::string rule = "power";
    double alpha = 0.5;
    std::size_t rank = 8;
    std::vector<double> values;
};

struct ModelConfig {
    std::string kind = "linear";
    std::size_t M = 64;
    int d = 2;
    int cutoff = 4;
    double nu = 1.0;
    double theta = 1.0;
    std::optional<std::size_t> N;  // empty: smallest N with r(N) > 0
    double drift_scale = 0.0;
    SigmaRule sigma;
    std::optional<double> K_B;
    std::size_t K_B_samples = 32;
};

struct GridConfig {
    double h = 1e-3;
    double t_end = 1.0;
    std::vector<double> checkpoints{1.0};
};

struct McConfig {
    std::size_t paths = 1000;
    std::uint64_t master_seed = 1;
};

struct TestFunctionConfig {
    std::string kind = "exp_linear";
    double c = 1.0;
    std::vector<std::pair<std::size_t, double>> v;  // one-based sparse entries
};

// Per-suite overrides; anything unset falls back to the shared values.
struct SuiteRun {
    std::string name;
    std::vector<double> checkpoints;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> noise_rank;
    double lambda = 0.1;          // moment_t1
    std::size_t probes = 100;     // variational
    std::size_t samples = 2000;   // assumptions
    bool jensen_floor = true;     // harnack
    double t = 1.0;               // gradient
    std::vector<std::pair<std::size_t, double>> direction{{1, 1.0}};  // gradient
    double fd_eps = 1e-2;         // gradient
    double rate_slack = 0.15;     // contraction
};

struct SuiteConfig {
    std::vector<std::pair<std::size_t, double>> x0;
    std::vector<std::pair<std::size_t, double>> y0;
    double beta_factor = kDefaultBetaFactor;
    std::vector<TestFunctionConfig> test_functions;
    std::vector<SuiteRun> runs;  // in the order of suite_order()
};

struct SweepConfig {
    std::vector<std::size_t> N;
    std::vector<double> nu;
    std::vector<double> theta;
    std::vector<std::size_t> sigma_rank;
};

struct OutputConfig {
    std::string directory = "spde_lab_out";
    std::vector<std::string> formats{"json", "csv"};

    bool wants(const std::string& f) const {
        for (const auto& x : formats) {
            if (x == f) return true;
        }
        return false;
    }
};

struct RunConfig {
    ModelConfig model;
    GridConfig grid;
    McConfig mc;
    SuiteConfig suite;
    SweepConfig sweep;
    OutputConfig output;
};

inline const std::vector<std::string>& suite_order() {
    static const std::vector<std::string> order{"assumptions", "variational", "contraction", "moment_t1",
                                                "moment_t2",   "girsanov",    "harnack",     "gradient"};
    return order;
}

namespace detail {

// Nonnegative integer, whether the parser stored it signed or unsigned.
inline bool is_count(const Json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

// Collects validation problems with their JSON path.
class Problems {
public:
    void add(const std::string& where, const std::string& what) { items_.push_back(where + ": " + what); }
    bool empty() const noexcept { return items_.empty(); }

    [[noreturn]] void raise() const {
        std::ostringstream os;
        os << "invalid configuration (" << items_.size() << " problem" << (items_.size() == 1 ? "" : "s") << ")";
        for (const auto& s : items_) os << "\n  - " << s;
        throw ConfigError(os.str());
    }

private:
    std::vector<std::string> items_;
};

class Reader {
public:
    Reader(const Json& j, std::string path, Problems& problems) : j_(j), path_(std::move(path)), p_(problems) {
        if (!j_.is_object()) p_.add(path_, "expected an object");
    }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
    std::string at(const char* key) const { return path_ + "." + key; }
    const Json* get(const char* key) const { return has(key) ? &j_.at(key) : nullptr; }

    void number(const char* key, double& out) const {
        if (const Json* v = get(key)) {
            if (v->is_number() && std::isfinite(v->get<double>())) {
                out = v->get<double>();
            } else {
                p_.add(at(key), "expected a finite number");
            }
        }
    }
    template <class Int>
    void count(const char* key, Int& out) const {
        if (const Json* v = get(key)) {
            if (is_count(*v)) {
                out = v->get<Int>();
            } else {
                p_.add(at(key), "expected a nonnegative integer");
            }
        }
    }
    void integer(const char* key, int& out) const {
        if (const Json* v = get(key)) {
            if (v->is_number_integer()) {
                out = v->get<int>();
            } else {
                p_.add(at(key), "expected an integer");
            }
        }
    }
    void text(const char* key, std::string& out) const {
        if (const Json* v = get(key)) {
            if (v->is_string()) {
                out = v->get<std::string>();
            } else {
                p_.add(at(key), "expected a string");
            }
        }
    }
    void boolean(const char* key, bool& out) const {
        if (const Json* v = get(key)) {
            if (v->is_boolean()) {
                out = v->get<bool>();
            } else {
                p_.add(at(key), "expected true or false");
            }
        }
    }
    void numbers(const char* key, std::vector<double>& out) const {
        if (const Json* v = get(key)) {
            if (!v->is_array()) {
                p_.add(at(key), "expected an array of numbers");
                return;
            }
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) {
                    p_.add(at(key), "expected an array of numbers");
                    return;
                }
                out.push_back(e.get<double>());
            }
        }
    }
    void counts(const char* key, std::vector<std::size_t>& out) const {
        if (const Json* v = get(key)) {
            if (!v->is_array()) {
                p_.add(at(key), "expected an array of nonnegative integers");
                return;
            }
            out.clear();
            for (const auto& e : *v) {
                if (!is_count(e)) {
                    p_.add(at(key), "expected an array of nonnegative integers");
                    return;
                }
                out.push_back(e.get<std::size_t>());
            }
        }
    }
    void strings(const char* key, std::vector<std::string>& out) const {
        if (const Json* v = get(key)) {
            if (!v->is_array()) {
                p_.add(at(key), "expected an array of strings");
                return;
            }
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_string()) {
                    p_.add(at(key), "expected an array of strings");
                    return;
                }
                out.push_back(e.get<std::string>());
            }
        }
    }
    // A vector either dense [v1, v2, ...] or sparse [[index, value], ...] with one-based indices.
    void vector_spec(const char* key, std::vector<std::pair<std::size_t, double>>& out) const {
        if (const Json* v = get(key)) parse_vector(*v, at(key), out, p_);
    }

    void unknown_keys(std::initializer_list<const char*> known) const {
        if (!j_.is_object()) return;
        std::set<std::string> k;
        for (const char* s : known) k.insert(s);
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!k.count(it.key())) p_.add(path_ + "." + it.key(), "unknown key");
        }
    }

    static void parse_vector(const Json& v, const std::string& where, std::vector<std::pair<std::size_t, double>>& out,
                             Problems& p) {
        out.clear();
        if (!v.is_array()) {
            p.add(where, "expected a dense array or a list of [index, value] pairs");
            return;
        }
        const bool sparse = !v.empty() && v.front().is_array();
        std::size_t i = 0;
        for (const auto& e : v) {
            ++i;
            if (sparse) {
                if (!e.is_array() || e.size() != 2 || !is_count(e[0]) || !e[1].is_number() ||
                    e[0].get<std::size_t>() < 1) {
                    p.add(where, "sparse entries must be [index >= 1, value]");
                    return;
                }
                out.emplace_back(e[0].get<std::size_t>(), e[1].get<double>());
            } else {
                if (!e.is_number()) {
                    p.add(where, "dense entries must be numbers");
                    return;
                }
                if (e.get<double>() != 0.0) out.emplace_back(i, e.get<double>());
            }
        }
    }

private:
    const Json& j_;
    std::string path_;
    Problems& p_;
};

inline void check_grid_times(const std::vector<double>& times, double h, const std::string& where, Problems& p) {
    if (times.empty()) p.add(where, "needs at least one checkpoint");
    for (double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            p.add(where, "checkpoint " + std::to_string(t) + " is negative or not finite");
            continue;
        }
        if (h > 0.0) {
            const double k = t / h;
            if (std::abs(k - std::round(k)) > 1e-6) {
                p.add(where, "checkpoint " + std::to_string(t) + " is not a multiple of h");
            }
        }
    }
}

}  // namespace detail

// Parses and validates a configuration document.
inline RunConfig parse_config(const Json& root) {
    detail::Problems p;
    RunConfig cfg;
    detail::Reader top(root, "$", p);
    if (!top.has("model")) p.add("$.model", "missing");
    top.unknown_keys({"model", "grid", "mc", "suite", "sweep", "output"});

    if (const Json* mj = top.get("model")) {
        detail::Reader r(*mj, "$.model", p);
        r.unknown_keys({"kind", "M", "d", "cutoff", "nu", "theta", "N", "drift_scale", "sigma", "K_B", "K_B_samples"});
        ModelConfig& m = cfg.model;
        r.text("kind", m.kind);
        r.count("M", m.M);
        r.integer("d", m.d);
        r.integer("cutoff", m.cutoff);
        r.number("nu", m.nu);
        r.number("theta", m.theta);
        r.number("drift_scale", m.drift_scale);
        r.count("K_B_samples", m.K_B_samples);
        if (const Json* n = r.get("N")) {
            if (n->is_string() && n->get<std::string>() == "min") {
                m.N.reset();
            } else if (detail::is_count(*n) && n->get<std::size_t>() >= 1) {
                m.N = n->get<std::size_t>();
            } else {
                p.add("$.model.N", "expected a positive integer or \"min\"");
            }
        }
        if (const Json* kb = r.get("K_B")) {
            if (kb->is_number() && kb->get<double>() >= 0.0) {
                m.K_B = kb->get<double>();
            } else {
                p.add("$.model.K_B", "expected a nonnegative number");
            }
        }
        if (m.kind != "linear" && m.kind != "navier_stokes") {
            p.add("$.model.kind", "must be \"linear\" or \"navier_stokes\"");
        }
        if (!(m.nu > 0.0)) p.add("$.model.nu", "must be positive");
        if (!(m.theta > 0.0)) p.add("$.model.theta", "must be positive");
        if (m.kind == "linear" && m.M < 2) p.add("$.model.M", "must be at least 2");
        if (m.kind == "linear" && (m.d < 1)) p.add("$.model.d", "must be positive");
        if (m.kind == "navier_stokes") {
            if (m.d < 1 || m.d > 3) p.add("$.model.d", "must be 1, 2 or 3");
            if (m.cutoff < 2) p.add("$.model.cutoff", "must be at least 2");
            if (m.K_B_samples < 1) p.add("$.model.K_B_samples", "must be at least 1");
        }
        if (m.N && *m.N < 1) p.add("$.model.N", "must be at least 1");
        if (const Json* sj = r.get("sigma")) {
            detail::Reader s(*sj, "$.model.sigma", p);
            s.unknown_keys({"rule", "alpha", "rank", "values"});
            SigmaRule& sr = m.sigma;
            if (s.has("values")) {
                sr.rule = "values";
                s.numbers("values", sr.values);
                for (double v : sr.values) {
                    if (!(v >= 0.0)) {
                        p.add("$.model.sigma.values", "entries must be nonnegative");
                        break;
                    }
                }
            } else {
                s.text("rule", sr.rule);
                if (sr.rule != "power") p.add("$.model.sigma.rule", "must be \"power\" (or give \"values\")");
                s.number("alpha", sr.alpha);
                s.count("rank", sr.rank);
                if (sr.rank < 1) p.add("$.model.sigma.rank", "must be at least 1");
            }
        }
    }

    if (const Json* gj = top.get("grid")) {
        detail::Reader r(*gj, "$.grid", p);
        r.unknown_keys({"h", "t_end", "steps", "checkpoints"});
        GridConfig& g = cfg.grid;
        r.number("t_end", g.t_end);
        if (r.has("steps") && r.has("h")) p.add("$.grid", "give either h or steps, not both");
        if (r.has("steps")) {
            std::size_t steps = 0;
            r.count("steps", steps);
            if (steps < 1) {
                p.add("$.grid.steps", "must be at least 1");
            } else {
                g.h = g.t_end / static_cast<double>(steps);
            }
        }
        r.number("h", g.h);
        g.checkpoints = {g.t_end};
        r.numbers("checkpoints", g.checkpoints);
        if (!(g.h > 0.0)) p.add("$.grid.h", "must be positive");
        if (!(g.t_end > 0.0)) p.add("$.grid.t_end", "must be positive");
        detail::check_grid_times(g.checkpoints, g.h, "$.grid.checkpoints", p);
    }

    if (const Json* mcj = top.get("mc")) {
        detail::Reader r(*mcj, "$.mc", p);
        r.unknown_keys({"paths", "master_seed"});
        r.count("paths", cfg.mc.paths);
        r.count("master_seed", cfg.mc.master_seed);
        if (cfg.mc.paths < 2) p.add("$.mc.paths", "must be at least 2");
    }

    if (const Json* sj = top.get("suite")) {
        detail::Reader r(*sj, "$.suite", p);
        r.unknown_keys({"x0", "y0", "beta_factor", "test_functions", "run"});
        SuiteConfig& s = cfg.suite;
        r.vector_spec("x0", s.x0);
        s.y0 = s.x0;
        r.vector_spec("y0", s.y0);
        r.number("beta_factor", s.beta_factor);
        if (s.beta_factor != 0.5 && s.beta_factor != 1.0) p.add("$.suite.beta_factor", "must be 0.5 or 1.0");
        if (const Json* fj = r.get("test_functions")) {
            if (!fj->is_array()) {
                p.add("$.suite.test_functions", "expected an array");
            } else {
                std::size_t i = 0;
                for (const auto& e : *fj) {
                    const std::string where = "$.suite.test_functions[" + std::to_string(i++) + "]";
                    detail::Reader fr(e, where, p);
                    fr.unknown_keys({"kind", "c", "v"});
                    TestFunctionConfig f;
                    fr.text("kind", f.kind);
                    fr.number("c", f.c);
                    fr.vector_spec("v", f.v);
                    if (f.kind != "exp_linear" && f.kind != "constant" && f.kind != "clipped_linear") {
                        p.add(where + ".kind", "must be exp_linear, constant or clipped_linear");
                    }
                    if (f.kind == "constant" && !(f.c > 0.0)) p.add(where + ".c", "constant must be positive");
                    s.test_functions.push_back(std::move(f));
                }
            }
        }
        if (const Json* rj = r.get("run")) {
            if (!rj->is_object()) {
                p.add("$.suite.run", "expected an object keyed by suite name");
            } else {
                for (auto it = rj->begin(); it != rj->end(); ++it) {
                    if (std::find(suite_order().begin(), suite_order().end(), it.key()) == suite_order().end()) {
                        p.add("$.suite.run." + it.key(), "unknown suite");
                    }
                }
                for (const std::string& name : suite_order()) {
                    if (!rj->contains(name)) continue;
                    const std::string where = "$.suite.run." + name;
                    detail::Reader sr(rj->at(name), where, p);
                    sr.unknown_keys({"checkpoints", "paths", "noise_rank", "lambda", "probes", "samples",
                                     "jensen_floor", "t", "direction", "fd_eps", "rate_slack"});
                    SuiteRun run;
                    run.name = name;
                    run.checkpoints = cfg.grid.checkpoints;
                    sr.numbers("checkpoints", run.checkpoints);
                    if (sr.has("paths")) {
                        std::size_t n = 0;
                        sr.count("paths", n);
                        if (n < 2) p.add(where + ".paths", "must be at least 2");
                        run.paths = n;
                    }
                    if (sr.has("noise_rank")) {
                        std::size_t n = 0;
                        sr.count("noise_rank", n);
                        if (n < 1) p.add(where + ".noise_rank", "must be at least 1");
                        run.noise_rank = n;
                    }
                    sr.number("lambda", run.lambda);
                    sr.count("probes", run.probes);
                    sr.count("samples", run.samples);
                    sr.boolean("jensen_floor", run.jensen_floor);
                    sr.number("t", run.t);
                    sr.vector_spec("direction", run.direction);
                    sr.number("fd_eps", run.fd_eps);
                    sr.number("rate_slack", run.rate_slack);
                    if (name == "moment_t1" && !(run.lambda > 0.0)) p.add(where + ".lambda", "must be positive");
                    if (name == "gradient" && !(run.fd_eps > 0.0)) p.add(where + ".fd_eps", "must be positive");
                    if (name == "gradient") run.checkpoints = {run.t};
                    if (name == "contraction" && !(run.rate_slack >= 0.0 && run.rate_slack < 1.0)) {
                        p.add(where + ".rate_slack", "must lie in [0, 1)");
                    }
                    if (name != "assumptions") detail::check_grid_times(run.checkpoints, cfg.grid.h, where, p);
                    s.runs.push_back(std::move(run));
                }
            }
        }
        for (const SuiteRun& run : s.runs) {
            if ((run.name == "harnack" || run.name == "girsanov" || run.name == "gradient") &&
                s.test_functions.empty()) {
                p.add("$.suite.test_functions", "suite " + run.name + " needs at least one test function");
            }
        }
    }

    if (const Json* wj = top.get("sweep")) {
        detail::Reader r(*wj, "$.sweep", p);
        r.unknown_keys({"N", "nu", "theta", "sigma_rank"});
        r.counts("N", cfg.sweep.N);
        r.numbers("nu", cfg.sweep.nu);
        r.numbers("theta", cfg.sweep.theta);
        r.counts("sigma_rank", cfg.sweep.sigma_rank);
        for (std::size_t n : cfg.sweep.N) {
            if (n < 1) p.add("$.sweep.N", "entries must be at least 1");
        }
        for (double v : cfg.sweep.nu) {
            if (!(v > 0.0)) p.add("$.sweep.nu", "entries must be positive");
        }
        for (double v : cfg.sweep.theta) {
            if (!(v > 0.0)) p.add("$.sweep.theta", "entries must be positive");
        }
    }

    if (const Json* oj = top.get("output")) {
        detail::Reader r(*oj, "$.output", p);
        r.unknown_keys({"directory", "formats"});
        r.text("directory", cfg.output.directory);
        r.strings("formats", cfg.output.formats);
        for (const auto& f : cfg.output.formats) {
            if (f != "json" && f != "csv") p.add("$.output.formats", "unknown format \"" + f + "\"");
        }
    }

    if (!p.empty()) p.raise();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json root;
    try {
        root = Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(root);
}

// Dense state from a sparse one-based spec; throws when an index exceeds M.
inline StateVector state_from_spec(const std::vector<std::pair<std::size_t, double>>& spec, std::size_t M,
                                   const std::string& what) {
    StateVector v(M);
    for (const auto& [i, x] : spec) {
        if (i < 1 || i > M) {
            throw ConfigError(what + ": index " + std::to_string(i) + " outside 1.." + std::to_string(M));
        }
        v[i - 1] = x;
    }
    return v;
}

// Builds the model; N and sigma rank may be overridden (sweep cells, per-suite noise rank).
struct ModelOverrides {
    std::optional<std::size_t> N;
    std::optional<double> nu;
    std::optional<double> theta;
    std::optional<std::size_t> sigma_rank;
};

inline ModelSpec build_model(const ModelConfig& mc, const ModelOverrides& ov = {}) {
    const double nu = ov.nu.value_or(mc.nu);
    const double theta = ov.theta.value_or(mc.theta);
    SigmaRule sr = mc.sigma;
    if (ov.sigma_rank) sr.rank = *ov.sigma_rank;

    auto sigma_for = [&](const Spectrum& s) {
        if (sr.rule == "values") {
            if (sr.values.size() != s.size()) {
                throw ConfigError("model.sigma.values has " + std::to_string(sr.values.size()) +
                                  " entries, expected M=" + std::to_string(s.size()));
            }
            return sr.values;
        }
        return sigma_power_rule(s, sr.alpha, sr.rank);
    };
    // Provisional rank 1 to evaluate constants; the final N is installed below.
    auto finish = [&](ModelSpec m) {
        std::optional<std::size_t> N = ov.N ? ov.N : mc.N;
        if (!N) {
            N = min_N(m);
            if (!N) {
                throw HypothesisError("no N in 1.." + std::to_string(m.dim() - 1) +
                                      " gives r(N) > 0 for this model");
            }
        }
        if (*N >= m.dim()) {
            throw ConfigError("model.N=" + std::to_string(*N) + " must be below M=" + std::to_string(m.dim()));
        }
        if (*N > max_admissible_noise_rank(m)) {
            throw HypothesisError("sigma vanishes inside H_N for N=" + std::to_string(*N) +
                                  " (sigma is invertible on the first " +
                                  std::to_string(max_admissible_noise_rank(m)) + " modes only)");
        }
        return with_noise_rank(std::move(m), *N);
    };

    if (mc.kind == "linear") {
        const Spectrum s = Spectrum::power_law(mc.M, nu, 2.0 * theta / static_cast<double>(mc.d));
        return finish(make_linear_model(s, 1, mc.drift_scale, sigma_for(s)));
    }
    if (mc.d >= 1 && mc.d <= 3 && theta < navier_stokes_theta_threshold(mc.d)) {
        std::ostringstream msg;
        msg << "theta below 1∨(d+2)/4: theta=" << theta << " < " << navier_stokes_theta_threshold(mc.d)
            << " for d=" << mc.d;
        throw HypothesisError(msg.str());
    }
    const FourierBasis basis(mc.d, mc.cutoff, nu, theta);
    const Spectrum s(basis.eigenvalues());
    NavierStokesOptions opts;
    opts.K_B_override = mc.K_B;
    opts.K_B_samples = mc.K_B_samples;
    return finish(make_navier_stokes_model(mc.d, mc.cutoff, nu, theta, 1, sigma_for(s), opts));
}

}  // namespace spdelab::cli
