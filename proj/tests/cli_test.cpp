#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string output;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("secagg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args, const std::string& env = "") {
    const fs::path log = dir_ / "output.txt";
    const std::string cmd = env + " " SECAGG_CLI_PATH " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream text;
    text << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text.str()};
  }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

constexpr const char* kScenario = R"(schema = secagg-scenario/1
[protocol]
S = 2
d = 8
k = 64
[clients]
honest = 4
norm_inflating = 1
adversary_norm = 5
[session]
)";

TEST_F(CliTest, CalibratePrintsFormulaIds) {
  const Result r = run("calibrate --eps 1 --delta 1e-5 --beta 0.01 --S 2 --k 64 --d 32");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("tau = 156.546164431"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("[soundness]"), std::string::npos);
}

TEST_F(CliTest, CalibrateInfeasibleAndMissingArgsExitTwo) {
  const Result infeasible = run("calibrate --eps 1 --delta 1e-5 --beta 0.01 --S 2 --k 16 --d 32");
  EXPECT_EQ(infeasible.code, 2);
  EXPECT_NE(infeasible.output.find("4 ln(1/beta)"), std::string::npos) << infeasible.output;
  EXPECT_EQ(run("calibrate --eps 1").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
}

TEST_F(CliTest, HelpShowsDefaults) {
  const Result r = run("experiment --help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("[1000]"), std::string::npos) << r.output;
}

TEST_F(CliTest, AggregateWritesTranscriptAndSummary) {
  const fs::path cfg = write("s.ini", std::string(kScenario) + "validity_threshold = 0.5\n");
  const Result r = run("aggregate --config " + cfg.string() + " --seed 7 --out-dir " + (dir_ / "out").string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "transcript.ndjson"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.json"));
  // Same seed, same transcript.
  const Result again = run("aggregate --config " + cfg.string() + " --seed 7 --out-dir " + (dir_ / "out2").string());
  EXPECT_EQ(r.output.substr(0, r.output.find('\n')), again.output.substr(0, again.output.find('\n')));
}

TEST_F(CliTest, AggregateAbortExitsThree) {
  const fs::path cfg = write("s.ini", std::string(kScenario) + "validity_threshold = 1\n");
  const Result r = run("aggregate --config " + cfg.string(), "SECAGG_OUTPUT_DIR=" + (dir_ / "env").string());
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "env" / "summary.json"));
}

TEST_F(CliTest, AggregateBadConfigExitsTwo) {
  const fs::path cfg = write("bad.ini", "schema = secagg-scenario/1\n[protocol]\nS = two\n");
  EXPECT_EQ(run("aggregate --config " + cfg.string() + " --out-dir " + dir_.string()).code, 2);
}

TEST_F(CliTest, ExperimentCsvSchema) {
  const fs::path out = dir_ / "e.csv";
  const Result r = run("experiment --kind completeness --grid 'k=32;d=4' --trials 20 --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.output;
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# schema: secagg-experiment/1");
  EXPECT_EQ(run("experiment --kind completeness --grid '' --trials 20").code, 2);
  EXPECT_EQ(run("experiment --kind nope --grid 'k=32' --trials 20").code, 2);
}

TEST_F(CliTest, ShareAndVerifyNorm) {
  const Result s = run("share --x 0.6,0.8 --S 3");
  EXPECT_EQ(s.code, 0) << s.output;
  EXPECT_NE(s.output.find("input_norm = 1\n"), std::string::npos) << s.output;
  const Result v = run("verify-norm --norm 1 --transcript " + (dir_ / "t.ndjson").string());
  EXPECT_EQ(v.code, 0) << v.output;
  EXPECT_NE(v.output.find("accept = "), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "t.ndjson"));
}

}  // namespace
