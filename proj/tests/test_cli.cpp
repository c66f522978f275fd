#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace spdelab;
using namespace spdelab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("spde_lab_test_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig small_config() {
    return parse_config(Json::parse(R"({
      "model": {"kind": "linear", "M": 16, "N": 1, "drift_scale": 0.5,
                "sigma": {"rule": "power", "alpha": 0.5, "rank": 4}},
      "grid": {"h": 0.01, "t_end": 1.0, "checkpoints": [0.25, 0.5, 1]},
      "mc": {"paths": 100, "master_seed": 3},
      "suite": {"x0": [[1, 0.2], [3, 0.15]], "y0": [[1, -0.2], [3, -0.15]],
                "test_functions": [{"kind": "exp_linear", "c": 0.5, "v": [[1, 1.0]]}],
                "run": {"contraction": {}, "moment_t1": {}, "harnack": {}}}
    })"));
}

struct Quiet {
    std::ostringstream log, err;
    CommandOptions opts(const fs::path& out, unsigned threads = 1) {
        CommandOptions o;
        o.out = out.string();
        o.threads = threads;
        o.log = &log;
        o.err = &err;
        return o;
    }
};

}  // namespace

TEST(Cli, ConstantsWithoutDriftGiveMinNOne) {
    RunConfig cfg = small_config();
    cfg.model.drift_scale = 0.0;
    cfg.model.N.reset();
    Quiet q;
    const fs::path out = scratch("constants");
    EXPECT_EQ(run_command("constants", cfg, q.opts(out)), kExitPass);
    const Json rep = Json::parse(slurp(out / "report.json"));
    EXPECT_EQ(rep["min_N"], 1);
    EXPECT_TRUE(fs::exists(out / "constants_0.csv"));
}

TEST(Cli, HypothesisViolationExitsTwo) {
    RunConfig cfg = small_config();
    cfg.model = ModelConfig{};
    cfg.model.kind = "navier_stokes";
    cfg.model.d = 3;
    cfg.model.cutoff = 3;
    cfg.model.theta = 1.0;
    Quiet q;
    EXPECT_EQ(run_command("constants", cfg, q.opts(scratch("ns3d"))), kExitHypothesis);
    EXPECT_NE(q.err.str().find("theta below 1∨(d+2)/4"), std::string::npos);
}

TEST(Cli, VerifyIsByteIdenticalAcrossThreadCounts) {
    const RunConfig cfg = small_config();
    Quiet q;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    EXPECT_EQ(run_command("verify", cfg, q.opts(a, 1)), kExitPass);
    EXPECT_EQ(run_command("verify", cfg, q.opts(b, 3)), kExitPass);
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    EXPECT_EQ(slurp(a / "contraction_1.csv"), slurp(b / "contraction_1.csv"));
    EXPECT_NE(q.log.str().find("PASS contraction"), std::string::npos);
}

TEST(Cli, CoupleFromEqualStartsHasZeroDistance) {
    RunConfig cfg = small_config();
    cfg.suite.y0 = cfg.suite.x0;
    Quiet q;
    const fs::path out = scratch("couple");
    EXPECT_EQ(run_command("couple", cfg, q.opts(out)), kExitPass);
    const Json rep = Json::parse(slurp(out / "report.json"));
    for (const auto& row : rep["rows"]) {
        EXPECT_EQ(row["dist_sq"]["mean"], 0.0);
        EXPECT_EQ(row["weight"]["mean"], 1.0);
    }
    const std::string csv = slurp(out / "couple_distance_1.csv");
    EXPECT_EQ(csv.rfind("# spde_lab csv v1 suite=couple_distance\n", 0), 0u);
}

TEST(Cli, SweepSlopesSteepenWithN) {
    RunConfig cfg = small_config();
    cfg.suite.runs.erase(cfg.suite.runs.begin() + 1, cfg.suite.runs.end());
    ASSERT_EQ(cfg.suite.runs.front().name, "contraction");
    cfg.sweep.N = {1, 2, 3};
    Quiet q;
    const fs::path out = scratch("sweep");
    EXPECT_EQ(run_command("sweep", cfg, q.opts(out)), kExitPass);
    const Json rep = Json::parse(slurp(out / "report.json"));
    ASSERT_EQ(rep["cells"].size(), 3u);
    double prev = 0.0;
    for (const auto& cell : rep["cells"]) {
        const double s = cell["fitted_log_slope"].get<double>();
        EXPECT_LT(s, prev);
        prev = s;
    }
}

TEST(Cli, SweepRecordsViolatingCells) {
    RunConfig cfg = small_config();
    cfg.suite.runs.resize(1);
    cfg.sweep.N = {1, 6};  // sigma rank is 4
    Quiet q;
    const fs::path out = scratch("sweep_bad");
    EXPECT_EQ(run_command("sweep", cfg, q.opts(out)), kExitHypothesis);
    const Json rep = Json::parse(slurp(out / "report.json"));
    EXPECT_EQ(rep["cells"][1]["status"], "hypothesis_violation");
}
