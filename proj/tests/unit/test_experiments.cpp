#include <gtest/gtest.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gearsim/config.hpp"
#include "gearsim/error.hpp"
#include "gearsim/experiments.hpp"

using namespace gearsim;

namespace {

const std::string kConfigDir = GEARSIM_CONFIG_DIR;
const std::string kCli       = GEARSIM_CLI;

struct CliRun {
    int exit_code = 0;
    std::string out;
};

// stdout and stderr of the CLI, merged
CliRun run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + kCli + " " + args + " 2>&1";
    FILE* pipe            = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        throw std::runtime_error("popen failed");
    }
    CliRun r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        r.out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    r.exit_code      = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig sample(const std::string& name) { return load_config(kConfigDir + "/" + name); }

} // namespace

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) {
        EXPECT_EQ(h.load(), 1);
    }
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) {
                                      throw Error(ErrorCode::InvalidArgument, "seven");
                                  }
                              }),
                 Error);
}

TEST(Experiments, OutputIndependentOfThreadCount) {
    for (const char* name : {"fringe_m21.json", "estimate_m7.json", "entangled_phi.json",
                             "coherent_m21.json", "bounds.json"}) {
        const ExperimentConfig c = sample(name);
        EXPECT_EQ(run_experiment(c, 1), run_experiment(c, 3)) << name;
    }
    ExperimentConfig adaptive = sample("adaptive.json");
    adaptive.runs             = 6;
    EXPECT_EQ(run_experiment(adaptive, 1), run_experiment(adaptive, 4));
}

TEST(Experiments, EveryCsvStartsWithVersionedHeader) {
    for (const char* name : {"fringe_m21.json", "estimate_m7.json", "adaptive.json",
                             "entangled_phi.json", "coherent_m21.json", "bounds.json"}) {
        const std::string csv = run_experiment(sample(name));
        EXPECT_EQ(csv.rfind("# gearsim-csv v1 ", 0), 0U) << name;
    }
}

TEST(Experiments, SeedChangesOutput) {
    ExperimentConfig c = sample("fringe_m21.json");
    const std::string a = cmd_fringe(c);
    c.seed += 1;
    EXPECT_NE(a, cmd_fringe(c));
}

TEST(Experiments, FringeRows) {
    const ExperimentConfig c = sample("fringe_m21.json");
    const std::string csv    = cmd_fringe(c);
    EXPECT_NE(csv.find("theta,records,n_h,n_v,p_hat,stderr\n"), std::string::npos);
    EXPECT_NE(csv.find("parameter,value,stderr\n"), std::string::npos);
    EXPECT_NE(csv.find("\nm,21,0\n"), std::string::npos);
}

TEST(Experiments, BoundsSections) {
    ExperimentConfig c = sample("bounds.json");
    const std::string csv = cmd_bounds(c);
    EXPECT_NE(csv.find("strategy,m,N,nu,V,eta,theta,qfi,cfi,crb\n"), std::string::npos);
    EXPECT_NE(csv.find("m,ideal,heuristic\n"), std::string::npos);
    c.kind = ExperimentKind::EnhancementCurve;
    const std::string curve = cmd_bounds(c);
    EXPECT_EQ(curve.find("strategy,m,N"), std::string::npos);
    EXPECT_NE(curve.find("m,ideal,heuristic\n"), std::string::npos);
}

TEST(Cli, WritesFileAndHonoursFlags) {
    const auto dir = std::filesystem::temp_directory_path() / "gearsim_cli_test";
    std::filesystem::create_directories(dir);
    const auto out = dir / "f.csv";
    const CliRun r    = run_cli("fringe --config " + kConfigDir + "/fringe_m21.json --seed 11 --threads 2 --out " +
                             out.string());
    ASSERT_EQ(r.exit_code, 0) << r.out;
    ExperimentConfig c = sample("fringe_m21.json");
    c.seed             = 11;
    EXPECT_EQ(slurp(out), cmd_fringe(c));
}

TEST(Cli, EnvironmentOverrides) {
    const auto dir = std::filesystem::temp_directory_path() / "gearsim_cli_env";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const CliRun r = run_cli("fringe --config " + kConfigDir + "/fringe_m21.json",
                          "GEARSIM_SEED=11 GEARSIM_OUT_DIR=" + dir.string());
    ASSERT_EQ(r.exit_code, 0) << r.out;
    ExperimentConfig c = sample("fringe_m21.json");
    c.seed             = 11;
    EXPECT_EQ(slurp(dir / "fringe_m21.csv"), cmd_fringe(c));

    // the flag wins over the environment
    const CliRun flag = run_cli("fringe --config " + kConfigDir + "/fringe_m21.json --seed 12 --out -",
                             "GEARSIM_SEED=11");
    ASSERT_EQ(flag.exit_code, 0) << flag.out;
    c.seed = 12;
    EXPECT_EQ(flag.out, cmd_fringe(c));
}

TEST(Cli, ErrorsAreMachineReadable) {
    const CliRun missing = run_cli("fringe --config /nonexistent.json");
    EXPECT_EQ(missing.exit_code, 1);
    EXPECT_EQ(missing.out.rfind("{\"error\":\"io\"", 0), 0U) << missing.out;

    const CliRun mismatch = run_cli("estimate --config " + kConfigDir + "/fringe_m21.json");
    EXPECT_EQ(mismatch.exit_code, 1);
    EXPECT_EQ(mismatch.out.rfind("{\"error\":\"config\"", 0), 0U) << mismatch.out;

    const CliRun usage = run_cli("fringe");
    EXPECT_EQ(usage.exit_code, 2);
    EXPECT_EQ(usage.out.rfind("{\"error\":\"usage\"", 0), 0U) << usage.out;

    const CliRun bad_seed = run_cli("fringe --config x.json --seed", "");
    EXPECT_NE(bad_seed.exit_code, 0);
}
