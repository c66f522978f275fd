// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "test_support.hpp"

using namespace spdelab;
using spdelab::testing::desk_model;
using spdelab::testing::desk_x0;
namespace fs = std::filesystem;

namespace {

// Pinned parameters.
constexpr double kStep = 1e-3;
constexpr std::size_t kPaths = 10000;
constexpr std::size_t kHarnackPaths = 20000;
constexpr std::uint64_t kSeed = 20240601;
constexpr double kIdentityTol = 1e-10;
constexpr double kVariationalTol = 1e-9;
constexpr double kRateSlack = 0.15;
constexpr double kRelTolR = 1e-12;

unsigned worker_count() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Criterion 1: trilinear identities of the Navier-Stokes model on T^2.
Outcome trilinear_identities() {
    const auto start = std::chrono::steady_clock::now();
    const FourierBasis basis(2, 4, 1.0, 1.0);
    NavierStokesOptions opts;
    const ModelSpec m = make_navier_stokes_model(2, 4, 1.0, 1.0, 4, std::vector<double>(basis.size(), 1.0), opts);
    const Spectrum& s = m.spectrum;
    const std::size_t M = m.dim();
    double worst_yy = 0.0;
    double worst_swap = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        NormalStream rng(kSeed, StreamTag::sampling, i);
        const StateVector x = spdelab::testing::gaussian(rng, M);
        const StateVector y = spdelab::testing::gaussian(rng, M);
        const StateVector z = spdelab::testing::gaussian(rng, M);
        const double yy = std::abs(trilinear_form(m, x, y, y)) / (norm_v(x, s) * norm_h(y) * norm_v(y, s));
        const double swap = std::abs(trilinear_form(m, x, y, z) + trilinear_form(m, x, z, y)) /
                            (norm_v(x, s) * norm_v(y, s) * norm_v(z, s));
        worst_yy = std::max(worst_yy, yy);
        worst_swap = std::max(worst_swap, swap);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = M == 48 && worst_yy <= kIdentityTol && worst_swap <= kIdentityTol && secs < 10.0;
    return {pass, "M=" + std::to_string(M) + " max|B(x,y,y)|/scale=" + num(worst_yy) +
                      " max|B(x,y,z)+B(x,z,y)|/scale=" + num(worst_swap) + " runtime=" + num(secs) + "s"};
}

// Criterion 2: discrete variational inequality of the reflection.
Outcome variational_inequality() {
    const ModelSpec m = desk_model();
    const TimeGrid grid = TimeGrid::with_step(2.0, kStep);
    const VariationalSuiteReport rep =
        verify_variational_suite(m, desk_x0(), grid, 100, {.paths = 100, .seed = kSeed, .threads = worker_count()});
    const bool pass = rep.pass && rep.paths_with_contact > 0 &&
                      rep.worst_normalized_probe_sum >= -kVariationalTol &&
                      rep.worst_normalized_x_dot_dl <= kVariationalTol;
    return {pass, "paths_with_contact=" + std::to_string(rep.paths_with_contact) + "/100 worst sum<phi-X,dL>/Var=" +
                      num(rep.worst_normalized_probe_sum) + " worst sum<X,dL>/Var=" +
                      num(rep.worst_normalized_x_dot_dl)};
}

struct GirsanovOutcomes {
    Outcome martingale;
    Outcome reweighting;
};

// Criteria 3 and 4 share one coupled ensemble and one independent direct ensemble.
GirsanovOutcomes girsanov() {
    const ModelSpec m = with_noise_rank(desk_model(), 4);
    const StateVector x0 = desk_x0(), y0 = -x0;
    const std::vector<double> times{0.5, 1.0, 2.0};
    const TimeGrid grid = TimeGrid::with_step(2.0, kStep);
    const std::vector<TestFunction> fs{TestFunction::exponential_linear(StateVector::unit(64, 0), 0.5)};
    const GirsanovReport rep =
        verify_girsanov(m, x0, y0, grid, times, fs, {.paths = kPaths, .seed = kSeed, .threads = worker_count()});
    GirsanovOutcomes out;
    out.martingale.pass = true;
    for (const auto& r : rep.martingale) {
        out.martingale.pass = out.martingale.pass && r.martingale_pass;
        out.martingale.detail += "t=" + num(r.t) + ": |E R-1|=" + num(std::abs(r.weight.mean - 1.0)) + " (3SE=" +
                                 num(3.0 * r.weight.std_error) + ") ";
    }
    out.reweighting.pass = true;
    for (const auto& r : rep.weak_uniqueness) {
        out.reweighting.pass = out.reweighting.pass && r.pass;
        out.reweighting.detail += "t=" + num(r.t) + ": |diff|=" + num(std::abs(r.difference)) + " (3SE=" +
                                  num(3.0 * r.combined_std_error) + ") ";
    }
    return out;
}

struct CouplingOutcomes {
    Outcome contraction;
    Outcome moment_t2;
};

// Criteria 5 and 7 share one coupled ensemble with N = min_N.
CouplingOutcomes contraction_and_t2() {
    const ModelSpec base = desk_model();
    const ModelSpec m = with_noise_rank(base, *min_N(base));
    const StateVector x0 = desk_x0(), y0 = -x0;
    const std::vector<double> times{0.25, 0.5, 1.0, 2.0, 4.0};
    const TimeGrid grid = TimeGrid::with_step(4.0, kStep);
    const CouplingEnsemble e =
        couple_ensemble(m, x0, y0, grid, times, {.paths = kPaths, .seed = kSeed, .threads = worker_count()});
    CouplingOutcomes out;
    const ContractionReport c = contraction_from_ensemble(m, x0, y0, e, kRateSlack);
    out.contraction.pass = c.pass && m.constants.K_B == 0.0 && std::abs(norm_h(x0 - y0) - 0.5) < 1e-15;
    out.contraction.detail = "N=" + std::to_string(m.noise_rank) + " r(N)=" + num(c.r_N) + " ";
    for (const auto& r : c.rows) {
        out.contraction.detail += "t=" + num(r.t) + ":" + num(r.estimate) + "<=" + num(r.bound) + " ";
    }
    out.contraction.detail += "slope=" + (c.fitted_log_slope ? num(*c.fitted_log_slope) : std::string("none")) +
                              " threshold=" + num(-c.r_N * (1.0 - kRateSlack));
    const MomentReport t2 = moment_T2_from_ensemble(m, x0, y0, e);
    out.moment_t2.pass = t2.pass;
    for (const auto& r : t2.rows) {
        out.moment_t2.detail += "t=" + num(r.t) + ":" + num(r.estimate) + "<=" + num(r.bound) + " ";
    }
    return out;
}

// Criterion 6.
Outcome moment_t1() {
    const ModelSpec m = desk_model();
    const std::vector<double> times{0.5, 1.0, 2.0};
    const TimeGrid grid = TimeGrid::with_step(2.0, kStep);
    const MomentReport rep =
        verify_moment_T1(m, desk_x0(), grid, times, 0.1, {.paths = kPaths, .seed = kSeed, .threads = worker_count()});
    Outcome out{rep.pass, ""};
    for (const auto& r : rep.rows) out.detail += "t=" + num(r.t) + ":" + num(r.estimate) + "<=" + num(r.bound) + " ";
    return out;
}

// Criterion 8: log-Harnack inequality, plus the Jensen floor with x0 = y0.
Outcome log_harnack() {
    const ModelSpec m = desk_model();
    const std::size_t N = m.noise_rank;
    const StateVector x0 = desk_x0(), y0 = -x0;
    const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    const TimeGrid grid = TimeGrid::with_step(4.0, kStep);
    const McOptions mc{.paths = kHarnackPaths, .seed = kSeed, .threads = worker_count()};
    std::vector<TestFunction> fs;
    for (double c : {0.25, 0.5, 1.0}) {
        for (std::size_t v : {std::size_t{0}, N}) fs.push_back(TestFunction::exponential_linear(StateVector::unit(64, v), c));
    }
    const PathEnsemble ex = simulate_ensemble(m, x0, grid, times, mc);
    const PathEnsemble ey = simulate_ensemble(m, y0, grid, times, mc);
    const auto reps = harnack_from_ensembles(m, x0, y0, ex, ey, fs);
    const auto floor = harnack_from_ensembles(m, x0, x0, ex, ex, fs);
    bool pass = reps.size() == fs.size() * times.size();
    double worst = 1e300;
    for (const auto& r : reps) {
        pass = pass && r.pass;
        worst = std::min(worst, r.margin / std::max(r.combined_std_error, 1e-300));
    }
    bool floor_pass = true;
    double floor_min = 1e300;
    for (const auto& r : floor) {
        floor_pass = floor_pass && r.pass && r.phi_value == 0.0 && r.psi_value == 0.0;
        floor_min = std::min(floor_min, r.margin);
    }
    return {pass && floor_pass, std::to_string(reps.size()) + " cases, min margin/SE=" + num(worst) +
                                    "; Jensen floor min margin=" + num(floor_min)};
}

// Independent evaluation of r(N), expanded into monomials.
double r_oracle(double Kb, double Ks, double KB, double b0, double s0, double lam) {
    const double KB2 = KB * KB, KB4 = KB2 * KB2;
    return lam - 2 * Kb - 3 * Ks - 4 * KB2 * Kb - 2 * KB2 * b0 * b0 - 16 * KB4 * Ks - 16 * KB4 * s0 * s0 -
           4 * KB2 * Ks - 4 * KB2 * s0 * s0;
}

// Criterion 9.
Outcome constants_engine() {
    double worst_rel = 0.0;
    bool monotone = true;
    std::size_t prev = 0;
    const Spectrum spec = Spectrum::power_law(4000, 1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double s = 0.1 + 0.25 * i;  // constants grow along the grid
        ModelConstants c;
        c.K_b = 0.5 * s;
        c.K_sigma = 0.1 * s;
        c.K_B = 0.3 * s;
        c.b0_vstar = 0.2 * s;
        c.sigma0_hs = 0.4 * s;
        const double lam = 3.0 + 7.0 * i;
        const double want = r_oracle(c.K_b, c.K_sigma, c.K_B, c.b0_vstar, c.sigma0_hs, lam);
        worst_rel = std::max(worst_rel, std::abs(compute_r(c, lam) - want) / std::abs(want));
        const auto n = min_N(c, spec);
        if (!n || *n < prev) monotone = false;
        if (n) prev = *n;
    }
    std::size_t strict = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        NormalStream rng(kSeed, StreamTag::sampling, 1000 + i);
        ModelConstants c;
        c.K_b = rng.uniform();
        c.K_B = 0.5 * rng.uniform();
        c.sigma0_hs = rng.uniform();
        c.sigma_inv_bound = 1.0 + rng.uniform();
        const HarnackConstants hc = make_harnack_constants(c, 10.0 + 10.0 * rng.uniform());
        const StateVector x{rng.uniform() - 0.5, 0.0}, y{0.0, rng.uniform() - 0.5};
        const double t1 = 3.0 * rng.uniform();
        const double t2 = t1 + 0.01 + rng.uniform();
        if (compute_psi(hc, t2, x, y) < compute_psi(hc, t1, x, y)) ++strict;
    }
    const bool pass = worst_rel <= kRelTolR && monotone && strict == 100;
    return {pass, "max rel err r(N)=" + num(worst_rel) + " min_N monotone=" + (monotone ? "yes" : "no") +
                      " Psi strictly decreasing on " + std::to_string(strict) + "/100"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Criterion 10: the CLI verify command with different thread counts.
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "spde_lab_acceptance";
    fs::remove_all(root);
    auto run = [&](unsigned threads, const std::string& dir) {
        const std::string cmd = std::string("\"") + SPDE_LAB_BINARY + "\" verify --config \"" + SPDE_LAB_CONFIGS +
                                "/quick_linear.json\" --threads " + std::to_string(threads) + " --out \"" +
                                (root / dir).string() + "\" > /dev/null";
        return std::system(cmd.c_str());
    };
    const int a = run(1, "t1");
    const int b = run(3, "t3");
    const std::string ra = slurp(root / "t1" / "report.json");
    const std::string rb = slurp(root / "t3" / "report.json");
    const bool pass = a == 0 && b == 0 && !ra.empty() && ra == rb;
    return {pass, "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", report.json " +
                      std::to_string(ra.size()) + " bytes, identical=" + (ra == rb ? "yes" : "no")};
}

}  // namespace

int main() {
    std::vector<std::pair<int, std::pair<std::string, Outcome>>> results;
    auto record = [&](int n, const std::string& name, const Outcome& o) {
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << n << "] " << name << ": " << o.detail << std::endl;
        results.push_back({n, {name, o}});
    };
    auto guarded = [](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("error: ") + e.what()};
        }
    };

    record(1, "trilinear identities", guarded(trilinear_identities));
    record(2, "reflection variational inequality", guarded(variational_inequality));
    GirsanovOutcomes g;
    try {
        g = girsanov();
    } catch (const std::exception& e) {
        g.martingale = g.reweighting = Outcome{false, std::string("error: ") + e.what()};
    }
    record(3, "Girsanov martingale", g.martingale);
    record(4, "weak-uniqueness reweighting", g.reweighting);
    CouplingOutcomes c;
    try {
        c = contraction_and_t2();
    } catch (const std::exception& e) {
        c.contraction = c.moment_t2 = Outcome{false, std::string("error: ") + e.what()};
    }
    record(5, "contraction", c.contraction);
    record(6, "moment bound T1", guarded(moment_t1));
    record(7, "moment bound T2", c.moment_t2);
    record(8, "asymptotic log-Harnack", guarded(log_harnack));
    record(9, "constants engine", guarded(constants_engine));
    record(10, "determinism", guarded(determinism));

    std::size_t failed = 0;
    for (const auto& r : results) failed += r.second.second.pass ? 0 : 1;
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " criteria FAILED") << std::endl;
    return failed == 0 ? 0 : 1;
}
