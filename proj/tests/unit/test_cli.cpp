#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slicesim/experiment.hpp"
#include "slicesim/topology.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(SLICESIM_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("slicesim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpListsSubcommandsAndKeys) {
  const auto r = cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"gen-topology", "run", "train", "experiment", "[ppo]", "replications"})
    EXPECT_NE(r.output.find(s), std::string::npos) << s;
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("run --solver magic").code, 1);
  EXPECT_EQ(cli("experiment").code, 1);
  EXPECT_EQ(cli("train").code, 1);
}

TEST_F(Cli, GenTopologyWritesParsableGraph) {
  const auto r = cli("gen-topology --nodes 6 --links 9 --seed 4 --out " + path("g.txt"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto g = slicesim::NetworkGraph::parse(slurp(path("g.txt")));
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.link_count(), 9u);
  EXPECT_EQ(cli("gen-topology --nodes 6 --links 9 --seed 4").output, slurp(path("g.txt")));
}

TEST_F(Cli, RunPrintsSummaryAndLogs) {
  ASSERT_EQ(cli("gen-topology --seed 2 --out " + path("g.txt")).code, 0);
  const auto r = cli("run --solver ip --graph " + path("g.txt") + " --horizon 40 --lambda 2 --seed 3 --events " +
                     path("ev.txt") + " --slots " + path("slots.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("solver=ip slots=40"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("sla_violation_rate="), std::string::npos);
  EXPECT_EQ(slurp(path("ev.txt")).rfind("evt 0 ", 0), 0u);
  const auto slots = slurp(path("slots.csv"));
  EXPECT_EQ(std::count(slots.begin(), slots.end(), '\n'), 41);
  EXPECT_EQ(cli("run --solver ip --graph " + path("g.txt") + " --horizon 40 --lambda 2 --seed 3").output, r.output);
}

TEST_F(Cli, RunFromTrace) {
  write("g.txt", "graph 3 2\nlink 0 1 100 1 3\nlink 1 2 100 1 5\n");
  write("t.txt", "req 1 0 3 0 2 10 100 eMBB\nreq 1048576 1 2 2 0 5 100 URLLC\n");
  const auto r = cli("run --graph " + path("g.txt") + " --trace " + path("t.txt") + " --horizon 5");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("generated=2 served=2"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("avg_cost_per_request=8"), std::string::npos) << r.output;
}

TEST_F(Cli, ConfigErrorsExitOne) {
  write("bad.ini", "[demand]\nlamda = 2\n");
  const auto r = cli("run --config " + path("bad.ini"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("lamda"), std::string::npos);
  EXPECT_EQ(cli("run --config " + path("missing.ini")).code, 1);
  EXPECT_EQ(cli("run --solver ppo --horizon 5").code, 1);
  EXPECT_EQ(cli("run --solver ppo --ckpt " + path("none.ckpt") + " --horizon 5").code, 1);
  EXPECT_EQ(cli("run --horizon 0").code, 1);
}

TEST_F(Cli, MalformedInputsExitOne) {
  write("g.txt", "graph 3 2\nlink 0 1 100 1 3\nlink 1 2 100 1 5\n");
  write("t.txt", "req 1 0 3 0 7 10 100 eMBB\n");  // node 7 does not exist
  EXPECT_EQ(cli("run --graph " + path("g.txt") + " --trace " + path("t.txt") + " --horizon 5").code, 1);
  write("disc.txt", "graph 4 2\nlink 0 1 100 1 3\nlink 2 3 100 1 5\n");
  EXPECT_EQ(cli("run --graph " + path("disc.txt") + " --horizon 5").code, 1);
}

TEST_F(Cli, RuntimeErrorsExitTwo) {
  // more links than a simple 4-node graph can hold
  EXPECT_EQ(cli("gen-topology --nodes 4 --links 9").code, 2);
}

TEST_F(Cli, TrainThenRunPpo) {
  const auto t = cli("train --iters 2 --rollout 32 --horizon 32 --seed 5 --ckpt " + path("p.ckpt") + " --curve " +
                     path("curve.txt"));
  ASSERT_EQ(t.code, 0) << t.output;
  EXPECT_EQ(slurp(path("p.ckpt")).rfind("ppo-ckpt v1 ", 0), 0u);
  const auto curve = slurp(path("curve.txt"));
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 3);
  const auto r = cli("run --solver ppo --ckpt " + path("p.ckpt") + " --horizon 20");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("solver=ppo"), std::string::npos);
  write("g.txt", "graph 3 2\nlink 0 1 100 1 3\nlink 1 2 100 1 5\n");
  // checkpoint trained for the default 8-node graph does not fit a 3-node one
  EXPECT_EQ(cli("run --solver ppo --ckpt " + path("p.ckpt") + " --graph " + path("g.txt") + " --horizon 20").code, 2);
}

TEST_F(Cli, ExperimentWritesCsv) {
  write("e.ini",
        "[experiment]\nlambdas = 1,2\nreplications = 2\nsolvers = greedy,ip\nhorizon = 30\nthreads = 1\n");
  const auto r = cli("experiment --config " + path("e.ini") + " --out " + path("out.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rows = slicesim::parse_csv(slurp(path("out.csv")));
  EXPECT_EQ(rows.size(), 8u + 4u);
  ASSERT_EQ(cli("experiment --config " + path("e.ini") + " --out " + path("again.csv") + " --threads 3").code, 0);
  EXPECT_EQ(slicesim::strip_wall_time(slurp(path("out.csv"))), slicesim::strip_wall_time(slurp(path("again.csv"))));
  write("noout.ini", "[experiment]\nhorizon = 5\n");
  EXPECT_EQ(cli("experiment --config " + path("noout.ini")).code, 1);
}
