// Runs the built command-line tool against the problem files.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"

namespace fs = std::filesystem;
using testsupport::problem_path;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(RAREGION_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("raregion-cli-" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Cli, CheckRegionExitCodes) {
  EXPECT_EQ(run("check-region " + problem_path("disk.json")).code, 0);
  EXPECT_EQ(run("check-region " + problem_path("example1.json")).code, 0);
  EXPECT_EQ(run("check-region " + problem_path("example1_tangential.json")).code, 1);
}

TEST(Cli, CheckDecompositionExitCodes) {
  EXPECT_EQ(run("check-decomposition " + problem_path("example1.json")).code, 0);
  EXPECT_EQ(run("check-decomposition " + problem_path("example1_tangential.json")).code, 1);
  EXPECT_EQ(run("check-decomposition " + problem_path("example3_r0.json")).code, 1);
}

TEST(Cli, IndeterminateAtCoarseResolution) {
  // at 9 samples per axis no grid point of the narrow seed component is inside
  const CliRun r = run("check-region " + problem_path("crossing.json") + " --grid-res 9");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("seed component not resolved"), std::string::npos);
  EXPECT_EQ(run("check-region " + problem_path("annulus.json") + " --grid-res 9").code, 2);
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(run("check-region /nonexistent.json").code, 3);
  EXPECT_EQ(run("check-region " + problem_path("disk.json") + " --grid-res 2").code, 3);
  EXPECT_EQ(run("check-region " + problem_path("disk.json") + " --tol-zero -1").code, 3);
  EXPECT_EQ(run("no-such-command").code, 3);
  EXPECT_EQ(run("check-decomposition " + problem_path("disk.json")).code, 3);  // no blocks
  EXPECT_EQ(run("check-decomposition " + problem_path("example3.json") + " --mode thm3 --b 7").code, 3);
  EXPECT_EQ(run("moment-map " + problem_path("example1_constant_groups.json")).code, 3);

  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"dimension": 2, "surfaces": [{"label": "S", "poly": "1-x1^2-"}],)"
                                     R"( "seed": [0, 0], "box": [[-2, 2], [-2, 2]]})";
  EXPECT_EQ(run("check-region " + (dir / "bad.json").string()).code, 3);
  std::ofstream(dir / "unknown.json") << R"({"dimension": 2, "surfaces": [{"label": "S", "poly": "1-x1^2-x2^2"}],)"
                                         R"( "seed": [0, 0], "box": [[-2, 2], [-2, 2]], "colour": 1})";
  EXPECT_EQ(run("check-region " + (dir / "unknown.json").string()).code, 3);
  std::ofstream(dir / "outside.json") << R"({"dimension": 2, "surfaces": [{"label": "S", "poly": "1-x1^2-x2^2"}],)"
                                         R"( "seed": [1.5, 0], "box": [[-2, 2], [-2, 2]]})";
  EXPECT_EQ(run("check-region " + (dir / "outside.json").string()).code, 3);
}

TEST(Cli, ReportIsDeterministic) {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  ASSERT_EQ(run("check-decomposition " + problem_path("example1.json") + " --out " + a.string()).code, 0);
  ASSERT_EQ(run("check-decomposition " + problem_path("example1.json") + " --out " + b.string()).code, 0);
  const std::string ra = slurp(a / "report.json");
  EXPECT_FALSE(ra.empty());
  EXPECT_EQ(ra, slurp(b / "report.json"));
  const auto j = raregion::json::parse(ra);
  EXPECT_EQ(j["overall"], "certified within box");
  EXPECT_EQ(j["command"], "check-decomposition");
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const std::string file = problem_path("example1_tangential.json");
  const CliRun one = run("check-decomposition " + file, "RA_REGION_THREADS=1");
  const CliRun many = run("check-decomposition " + file, "RA_REGION_THREADS=8");
  EXPECT_EQ(one.code, 1);
  EXPECT_EQ(one.out, many.out);
}

TEST(Cli, MomentMapWritesSystemAndFibers) {
  const fs::path d = scratch("mm");
  const CliRun r = run("moment-map " + problem_path("example1.json") + " --out " + d.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("vars: 5\n", 0), 0u);
  EXPECT_TRUE(fs::exists(d / "system.txt"));
  EXPECT_TRUE(fs::exists(d / "fibers.txt"));
  const auto [total, eqs] = raregion::parse_system(slurp(d / "system.txt"));
  EXPECT_EQ(total, 5);
  EXPECT_EQ(eqs.size(), 2u);
}

TEST(Cli, ReebDot) {
  const CliRun r = run("reeb " + problem_path("annulus.json") + " --coord 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("split"), std::string::npos);
  EXPECT_NE(r.out.find("merge"), std::string::npos);
  EXPECT_EQ(run("reeb " + problem_path("example1_tangential.json")).code, 1);
}

TEST(Cli, ClassifyDump) {
  const CliRun r = run("classify " + problem_path("disk.json") + " --N 1");
  ASSERT_EQ(r.code, 0);
  int critical = 0;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);)
    if (line.find("{1}:critical") != std::string::npos) ++critical;
  EXPECT_EQ(critical, 2);
  EXPECT_EQ(run("classify " + problem_path("disk.json") + " --N 3").code, 3);
}
