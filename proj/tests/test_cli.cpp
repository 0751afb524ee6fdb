#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(CIRDETECT_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cirdetect_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Cli, SimulateEstimateTestChangepoint) {
    const fs::path path = scratch("change.csv");
    auto r = run("simulate --a 2 --a-post 1 --b 1 --sigma 0.5 --rho 0.5 --t-end 300 --dt 0.01 --seed 3 --out " +
                 path.string());
    ASSERT_EQ(r.code, 0);
    const auto meta = nlohmann::json::parse(r.out);
    EXPECT_EQ(meta["change_index"].get<int>(), 15000);

    r = run("estimate --path " + path.string());
    ASSERT_EQ(r.code, 0);
    const auto est = nlohmann::json::parse(r.out);
    for (const char* key : {"a_hat", "b_hat", "sigma_sq_hat", "det_q"}) EXPECT_TRUE(est.contains(key));
    EXPECT_NEAR(est["sigma_sq_hat"].get<double>(), 0.25, 0.02);

    const fs::path traj = scratch("traj.csv");
    r = run("test --path " + path.string() + " --param both --side two --alpha 0.05 --emit-trajectory " +
            traj.string());
    ASSERT_EQ(r.code, 0);
    const auto test = nlohmann::json::parse(r.out);
    ASSERT_EQ(test["decisions"].size(), 2u);
    EXPECT_TRUE(test["decisions"][0]["reject"].get<bool>());
    std::ifstream tf(traj);
    std::string header;
    std::getline(tf, header);
    EXPECT_EQ(header, "t,score_a,score_b");

    r = run("changepoint --path " + path.string() + " --param a --direction down");
    ASSERT_EQ(r.code, 0);
    const auto cp = nlohmann::json::parse(r.out);
    EXPECT_NEAR(cp["tau_hat"].get<double>(), 150.0, 30.0);
}

TEST(Cli, ExperimentFromConfig) {
    const fs::path cfg = scratch("size.json");
    std::ofstream(cfg) << R"({"kind":"size","horizon":20,"dt":0.05,"replications":4,"per_replication":true})";
    const fs::path out = scratch("report.json");
    auto r = run("experiment --config " + cfg.string() + " --seed 5 --out " + out.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream is(out);
    const auto report = nlohmann::json::parse(is);
    EXPECT_EQ(report["seed"].get<int>(), 5);
    EXPECT_EQ(report["aggregates"]["replications"].get<int>(), 4);
    EXPECT_TRUE(fs::exists(out.string() + ".replications.csv"));
}

TEST(Cli, UserErrorsExitWithOne) {
    const fs::path bad = scratch("bad.csv");
    std::ofstream(bad) << "t,x\n0,1\n0.1,-2\n0.2,1\n";
    EXPECT_EQ(run("estimate --path " + bad.string()).code, 1);
    EXPECT_EQ(run("estimate --path /nonexistent/file.csv").code, 1);
    EXPECT_EQ(run("test --path " + bad.string() + " --side sideways").code, 1);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("simulate --a -1").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}
