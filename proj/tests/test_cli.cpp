#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

struct Result {
  int status;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(LINGAE_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string temp(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lingae_cli_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST(Cli, VerifyReportsOneLinePerStatementInstance) {
  const auto r = run("verify --instances 3 --seed 5");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(lines(r.out), 1u + 5u * 3u);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, InjectedRankDeficiencyIsNotAFailure) {
  const auto r = run("verify --instances 2 --inject-rank-deficient");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("theorem1,\"n="), std::string::npos);
  EXPECT_NE(r.out.find("HYPOTHESIS_VIOLATED"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("train --no-such-flag").status, 1);
  EXPECT_EQ(run("train --task sideways").status, 1);
  EXPECT_EQ(run("real --data /definitely/missing").status, 3);
  const auto cfg = temp("bad.cfg");
  std::ofstream(cfg) << "[sweep]\nseeds = lots\n";
  EXPECT_EQ(run("sweep --config " + cfg).status, 1);
}

TEST(Cli, SynthThenReportAlignment) {
  const auto dir = temp("synth");
  ASSERT_EQ(run("synth --seed 1 --overlap 0 --out " + dir).status, 0);
  EXPECT_TRUE(std::filesystem::exists(dir + "/edges.txt"));
  const auto r = run("report-alignment --data " + dir);
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(lines(r.out), 2u);
  const auto row = r.out.substr(r.out.find('\n') + 1);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 4);
}

TEST(Cli, ReportAlignmentFeaturelessIsDataError) {
  const auto dir = temp("featureless");
  std::filesystem::create_directories(dir);
  std::ofstream(dir + "/edges.txt") << "0 1\n1 2\n";
  EXPECT_EQ(run("report-alignment --data " + dir).status, 3);
}

TEST(Cli, TrainWritesOneRowAndLossHistory) {
  const auto dir = temp("train");
  ASSERT_EQ(run("synth --seed 2 --out " + dir).status, 0);
  const auto hist = temp("hist.csv");
  const auto r = run("train --data " + dir + " --variant relu --features off --dim 4 --loss-history " + hist);
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(lines(r.out), 2u);
  EXPECT_NE(r.out.find(",relu,off,"), std::string::npos);
  std::ifstream h(hist);
  std::stringstream ss;
  ss << h.rdbuf();
  EXPECT_EQ(lines(ss.str()), 201u);
}
