// spde_lab: configuration-driven front end for the reflected SPDE laboratory.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

unsigned threads_from_env() {
    const char* env = std::getenv("SPDE_LAB_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    try {
        const long v = std::stol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid SPDE_LAB_THREADS=" << env << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spde_lab: reflected SPDE simulation and log-Harnack verification"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir;

    const char* names[] = {"constants", "simulate", "couple", "verify", "sweep"};
    const char* help[] = {"print r(N), min_N and the inequality constants",
                          "simulate an ensemble of reflected paths",
                          "simulate coupled pairs under shared noise",
                          "run the verification suites listed in the config",
                          "run the suites over a grid of (N, nu, theta, sigma rank)"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed, overrides mc.master_seed");
        sub->add_option("--threads", threads, "worker threads (default: $SPDE_LAB_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory, overrides output.directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; bad arguments count as configuration errors.
        const int code = app.exit(e);
        return code == 0 ? 0 : spdelab::cli::kExitHypothesis;
    }

    spdelab::cli::CommandOptions opts;
    opts.threads = threads > 0 ? threads : threads_from_env();
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--seed") > 0) opts.seed = seed;
        if (sub->count("--out") > 0) opts.out = out_dir;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const spdelab::cli::RunConfig cfg = spdelab::cli::load_config(config_path);
        return spdelab::cli::run_command(command, cfg, opts);
    } catch (const spdelab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return spdelab::cli::kExitHypothesis;
    } catch (const spdelab::HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return spdelab::cli::kExitHypothesis;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return spdelab::cli::kExitSuiteFailure;
    }
}
