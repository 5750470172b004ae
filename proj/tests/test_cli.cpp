#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dirlat/io.hpp"

using namespace dirlat;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(DIRLAT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("dirlat_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(file(name)) << text; }
  static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, GenerateIsDeterministicAndValid) {
  ASSERT_EQ(run("generate --n 6 --seed 1 --output " + file("a.json")).code, 0);
  ASSERT_EQ(run("generate --n 6 --seed 1 --output " + file("b.json")).code, 0);
  EXPECT_EQ(slurp(file("a.json")), slurp(file("b.json")));
  ASSERT_EQ(run("generate --n 6 --seed 2 --symmetric --output " + file("s.json")).code, 0);
  Metric m = io::metric_from(json::parse(slurp(file("s.json"))));
  EXPECT_TRUE(m.symmetric);
  for (int u = 0; u < m.n(); ++u)
    for (int v = 0; v < m.n(); ++v) EXPECT_EQ(m(u, v), m(v, u));
  Metric a = io::metric_from(json::parse(slurp(file("a.json"))));
  EXPECT_EQ(a.dist, generate_random(6, 8, 1, false).dist);
}

TEST_F(Cli, SolveDirlat) {
  write("one.json", R"({"dist":[["0","3"],["3","0"]]})");
  auto r = run("solve-dirlat --input " + file("one.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out).at("latency"), "3");
  ASSERT_EQ(run("generate --n 6 --max 6 --seed 4 --output " + file("g.json")).code, 0);
  r = run("solve-dirlat --input " + file("g.json") + " --mode guided --backend exact --rho 2/3");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_TRUE(j.at("verified").get<bool>());
  EXPECT_TRUE(j.at("certificate").at("failures").empty());
  write("bad.json", R"({"dist":[["0","1","9"],["1","0","1"],["1","1","0"]]})");
  EXPECT_EQ(run("solve-dirlat --input " + file("bad.json")).code, 2);
  write("junk.json", "{not json");
  EXPECT_EQ(run("solve-dirlat --input " + file("junk.json")).code, 2);
  EXPECT_EQ(run("solve-dirlat --input " + file("g.json") + " --rho 1/3").code, 2);
}

TEST_F(Cli, SolveAtsppTwoNodes) {
  write("two.json", R"({"dist":[["0","4"],["2","0"]]})");
  auto r = run("solve-atspp --input " + file("two.json") + " --rho 3/4");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_EQ(j.at("ratio"), "1");
  EXPECT_EQ(j.at("path"), (std::vector<int>{0, 1}));
}

TEST_F(Cli, RegretOnSymmetricInstance) {
  ASSERT_EQ(run("generate --n 8 --max 7 --seed 3 --symmetric --output " + file("s.json")).code, 0);
  auto r = run("regret --input " + file("s.json") + " --rho 2/3");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  Rational bound = io::rational_from(j.at("bound"));
  EXPECT_LE(io::rational_from(j.at("path_cost")), bound);
  EXPECT_EQ(bound, io::rational_from(j.at("gap_bound_factor")) * io::rational_from(j.at("opt_lp")));
  ASSERT_EQ(run("generate --n 5 --seed 3 --output " + file("a.json")).code, 0);
  EXPECT_EQ(run("regret --input " + file("a.json")).code, 2);
}

TEST_F(Cli, GapAndArchive) {
  write("line.json", R"({"symmetric":true,"dist":[["0","1","2"],["1","0","1"],["2","1","0"]]})");
  auto r = run("gap --input " + file("line.json") + " --rho 3/5 --archive " + file("arch.jsonl"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out).at("record").at("ratio"), "1");
  ASSERT_EQ(run("gap --search --n 5 --iterations 20 --seed 3 --rho 3/5 --archive " + file("arch.jsonl")).code, 0);
  r = run("gap --reverify " + file("arch.jsonl") + " --rho 3/5");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out).at("records").size(), 2u);
}

TEST_F(Cli, VerifyRejectsInvalidSolution) {
  write("line.json", R"({"dist":[["0","1","2"],["1","0","1"],["2","1","0"]]})");
  write("x.json", R"({"x":[["0","1/2","1/2"],["0","0","1/2"],["0","0","0"]]})");
  auto r = run("verify --input " + file("line.json") + " --x " + file("x.json") + " --rho 3/5");
  EXPECT_EQ(r.code, 1);
  json j = json::parse(r.out);
  EXPECT_FALSE(j.at("certificate").get<bool>());
  EXPECT_EQ(j.at("violated_cut"), std::vector<int>{1});
  write("p.json", R"([["0","1","0"],["0","0","1"],["0","0","0"]])");
  r = run("verify --input " + file("line.json") + " --x " + file("p.json") + " --rho 3/5");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out).at("ratio"), "1");
}
