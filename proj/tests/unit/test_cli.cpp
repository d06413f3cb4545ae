#include "tvrise/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace tvrise;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string out;
    std::string err;
};

Result invoke(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"tvrise"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const std::string& a : storage) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tvrise_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string read_file(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_F(CliTest, RunWritesArtifacts) {
    const Result r = invoke({"run", "--scenario", "S4_disturbance_only", "--t-end", "2", "--controllers",
                             "rise,sigma_mod", "--out", path("out")});
    ASSERT_EQ(r.status, cli::kOk) << r.err;
    for (const char* f : {"rise.csv", "sigma_mod.csv", "rise.summary.json", "sigma_mod.summary.json",
                          "scenario.json", "compare.json"}) {
        EXPECT_TRUE(fs::exists(path("out/") + f)) << f;
    }
    const ordered_json compare = ordered_json::parse(read_file(path("out/compare.json")));
    EXPECT_TRUE(compare["controllers"].contains("rise"));
    EXPECT_TRUE(compare["controllers"]["sigma_mod"]["min_P"].is_null());
    // The written scenario reloads through --config.
    const Result again = invoke({"run", "--config", path("out/scenario.json"), "--out", path("again")});
    EXPECT_EQ(again.status, cli::kOk) << again.err;
    EXPECT_EQ(read_file(path("out/rise.csv")), read_file(path("again/rise.csv")));
}

TEST_F(CliTest, SingleControllerSkipsCompare) {
    const Result r = invoke({"run", "--scenario", "S4_disturbance_only", "--t-end", "1", "--out", path("out")});
    ASSERT_EQ(r.status, cli::kOk) << r.err;
    EXPECT_FALSE(fs::exists(path("out/compare.json")));
}

TEST_F(CliTest, UndersizedBetaFailsCertificate) {
    const Result r = invoke({"run", "--t-end", "2", "--override", "beta=0.01", "--out", path("out")});
    EXPECT_EQ(r.status, cli::kCertificateFailure);
    EXPECT_NE(r.err.find("gain condition"), std::string::npos);
}

TEST_F(CliTest, VerifyFlagsWeakK) {
    const Result r = invoke({"verify", "--t-end", "2", "--override", "K=0.4"});
    EXPECT_EQ(r.status, cli::kCertificateFailure);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
    EXPECT_NE(r.out.find("inverse_bound_randomized"), std::string::npos);
}

TEST_F(CliTest, VerifyPassesOnCompliantScenario) {
    const Result r = invoke({"verify", "--scenario", "S4_disturbance_only", "--t-end", "5", "--out", path("v")});
    EXPECT_EQ(r.status, cli::kOk) << r.out << r.err;
    EXPECT_TRUE(fs::exists(path("v/verify.json")));
}

TEST_F(CliTest, BadConfigIsConfigFailure) {
    std::ofstream(path("bad.json")) << R"({"trajectory_set": "S1_scalar", "gains": {"Kp": 3}})";
    const Result r = invoke({"run", "--config", path("bad.json"), "--out", path("out")});
    EXPECT_EQ(r.status, cli::kConfigFailure);
    EXPECT_NE(r.err.find("/gains/Kp"), std::string::npos);
    EXPECT_EQ(invoke({"run", "--scenario", "S7", "--out", path("out")}).status, cli::kConfigFailure);
    EXPECT_EQ(invoke({"run", "--override", "nope=1", "--out", path("out")}).status, cli::kConfigFailure);
    EXPECT_EQ(invoke({"run", "--controllers", "pid", "--out", path("out")}).status, cli::kConfigFailure);
}

TEST_F(CliTest, DivergenceExitCode) {
    const Result r = invoke({"run", "--controllers", "sigma_mod", "--override", "gamma=1e8", "--dt", "0.05", "--out",
                             path("out")});
    EXPECT_EQ(r.status, cli::kDiverged);
    EXPECT_NE(r.err.find("step 1"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsAndHelp) {
    EXPECT_EQ(invoke({}).status, cli::kConfigFailure);
    EXPECT_EQ(invoke({"run", "--no-such-flag"}).status, cli::kConfigFailure);
    const Result help = invoke({"--help"});
    EXPECT_EQ(help.status, cli::kOk);
    EXPECT_NE(help.out.find("verify"), std::string::npos);
}

TEST_F(CliTest, PlotWithoutSwitchesHasNoMarkers) {
    // The robust baseline has no projection, hence no branch switches.
    ASSERT_EQ(invoke({"run", "--t-end", "1", "--controllers", "robust", "--out", path("out")}).status, 0);
    const Result r = invoke({"plot", path("out/robust.csv"), "--out", path("plots")});
    ASSERT_EQ(r.status, cli::kOk) << r.err;
    const std::string script = read_file(path("plots/plot_robust.py"));
    EXPECT_EQ(script.find("SWITCHES"), std::string::npos);
    EXPECT_EQ(script.find("axvline"), std::string::npos);
    EXPECT_NE(script.find("subplots(6, 1"), std::string::npos);
}

TEST_F(CliTest, PlotOverlayWithSwitches) {
    ASSERT_EQ(invoke({"run", "--t-end", "2", "--controllers", "rise,robust", "--out", path("out")}).status, 0);
    const Result r = invoke({"plot", path("out/rise.csv"), path("out/robust.csv")});
    ASSERT_EQ(r.status, cli::kOk) << r.err;
    const std::string script = read_file(path("out/plot_compare.py"));
    EXPECT_NE(script.find("SWITCHES = {"), std::string::npos);
    EXPECT_NE(script.find("\"robust\""), std::string::npos);
    EXPECT_NE(script.find("legend"), std::string::npos);
}

TEST_F(CliTest, PlotRejectsCorruptCsv) {
    std::ofstream(path("broken.csv")) << "t,e1\n0,\"unterminated\n";
    EXPECT_EQ(invoke({"plot", path("broken.csv")}).status, cli::kConfigFailure);
    std::ofstream(path("short.csv")) << "t,e1\n0,1\n";
    const Result missing_cols = invoke({"plot", path("short.csv")});
    EXPECT_EQ(missing_cols.status, cli::kConfigFailure);
    EXPECT_NE(missing_cols.err.find("missing column"), std::string::npos);
    EXPECT_EQ(invoke({"plot", path("does_not_exist.csv")}).status, cli::kConfigFailure);
}

TEST(CliScript, SwitchTimesEmbedded) {
    const std::string script = cli::plot_script({{"/tmp/a.csv", "a", {0.5, 1.25}}});
    EXPECT_NE(script.find("\"a\": [0.5, 1.25]"), std::string::npos);
}
