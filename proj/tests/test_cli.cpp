#include "jumplan/density.hpp"
#include "jumplan/report_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(JUMPLAN_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("jumplan_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, SimulateRowsAndDeterminism) {
  const std::string args = "simulate --theta 1 --sigma 1 --lambda 1 --n 1000 --delta 0.01 --seed 7 --out ";
  ASSERT_EQ(run(args + file("a.csv")).code, 0);
  ASSERT_EQ(run(args + file("b.csv") + " --jobs 4").code, 0);
  const std::string a = slurp(file("a.csv"));
  EXPECT_EQ(a, slurp(file("b.csv")));
  std::istringstream in(a);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1 + 1001);
  EXPECT_TRUE(fs::exists(file("a.csv.config.toml")));
}

TEST_F(Cli, ConfigRoundTrip) {
  ASSERT_EQ(run("simulate --n 50 --delta 0.02 --seed 3 --replicates 3 --out " + file("a.csv")).code, 0);
  ASSERT_EQ(run("simulate --config " + file("a.csv.config.toml") + " --out " + file("b.csv")).code, 0);
  EXPECT_EQ(slurp(file("a.csv")), slurp(file("b.csv")));
  // flags override the file
  ASSERT_EQ(run("simulate --config " + file("a.csv.config.toml") + " --seed 4 --out " + file("c.csv")).code, 0);
  EXPECT_NE(slurp(file("a.csv")), slurp(file("c.csv")));
}

TEST_F(Cli, ConfigErrors) {
  EXPECT_EQ(run("simulate --delta 2 --seed 7").code, 2);
  EXPECT_EQ(run("simulate --n 10 --delta 0.1").code, 2);  // seed is mandatory
  std::ofstream(file("bad.toml")) << "[simulate]\nn=10\nunknown_key=1\n";
  EXPECT_EQ(run("simulate --seed 1 --config " + file("bad.toml")).code, 2);
  EXPECT_EQ(run("lan --seed 1 --z 1,x,1").code, 2);
  EXPECT_EQ(run("lan --seed 1 --z 1,1").code, 2);
  EXPECT_EQ(run("lan --seed 1 --replicates 10").code, 2);
  EXPECT_EQ(run("score --sigma -1").code, 2);
  EXPECT_EQ(run("mle --input " + file("missing.csv")).code, 2);
  EXPECT_EQ(run("nosuchcommand").code, 2);
}

TEST_F(Cli, EnvironmentOverride) {
  ASSERT_EQ(run("simulate --n 20 --delta 0.1 --seed 9 --out " + file("a.csv")).code, 0);
  EXPECT_EQ(run("simulate --n 20 --delta 0.1 --out " + file("b.csv")).code, 2);
  ::setenv("JUMPLAN_SEED", "9", 1);
  const int code = run("simulate --n 20 --delta 0.1 --out " + file("b.csv")).code;
  ::unsetenv("JUMPLAN_SEED");
  ASSERT_EQ(code, 0);
  EXPECT_EQ(slurp(file("a.csv")), slurp(file("b.csv")));
}

TEST_F(Cli, Fisher) {
  const CliResult r = run("fisher --sigma 1 --lambda 1");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["schema_version"], 1);
  const auto g = doc["result"]["gamma"];
  EXPECT_EQ(g[0][0], 1.0);
  EXPECT_EQ(g[0][2], -1.0);
  EXPECT_EQ(g[1][1], 2.0);
  EXPECT_EQ(g[2][2], 2.0);
  EXPECT_EQ(g[2][0], -1.0);
}

TEST_F(Cli, ScoreMatchesLibrary) {
  const CliResult r = run("score --theta 1 --sigma 1 --lambda 1 --delta 0.1 --dx 0.3");
  ASSERT_EQ(r.code, 0);
  const auto res = nlohmann::json::parse(r.out)["result"];
  const jumplan::ScoreVector s = jumplan::score_vector({1, 1, 1}, 0.1, 0.3);
  EXPECT_EQ(res["d_theta"].get<double>(), s.d_theta);
  EXPECT_EQ(res["d_sigma"].get<double>(), s.d_sigma);
  EXPECT_EQ(res["d_lambda"].get<double>(), s.d_lambda);
}

TEST_F(Cli, Density) {
  const CliResult r = run("density --theta 1 --sigma 1 --lambda 1 --delta 0.1 --x 0.5 --y 0.8 --format csv");
  ASSERT_EQ(r.code, 0);
  const std::string row = r.out.substr(r.out.find('\n') + 1);
  EXPECT_EQ(std::stod(row.substr(0, row.find(','))),
            jumplan::log_transition_density({1, 1, 1}, 0.1, 0.5, 0.8));
}

TEST_F(Cli, LanReport) {
  const CliResult r = run("lan --seed 1 --n-list 300 --replicates 100 --out " + file("lan.json"));
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(slurp(file("lan.json")));
  const auto row = doc["result"]["rows"][0];
  EXPECT_EQ(row["theory_mean"], -1.5);
  EXPECT_EQ(row["theory_var"], 3.0);
  EXPECT_TRUE(doc.contains("resolved_config"));
  const std::string lr = slurp(file("lan.json.lr.csv"));
  EXPECT_EQ(lr.substr(0, 15), "n,replicate,lr\n");

  const CliResult zero = run("lan --seed 1 --z 0,0,0 --n-list 300 --replicates 100");
  ASSERT_EQ(zero.code, 0);
  const auto zrow = nlohmann::json::parse(zero.out)["result"]["rows"][0];
  EXPECT_TRUE(zrow["degenerate"].get<bool>());
  EXPECT_TRUE(zrow.contains("ks"));
  EXPECT_FALSE(zrow.contains("ks_statistic"));
}

TEST_F(Cli, BoundsDecay) {
  const CliResult r = run("bounds --alpha 0.25 --p 1 --deltas 0.02,0.01,0.005,0.002 --seed 1 "
                    "--replicates 20000 --check-draws 1000");
  ASSERT_EQ(r.code, 0);
  const auto fit = nlohmann::json::parse(r.out)["result"]["decay_fits"][0];
  EXPECT_LT(fit["slope"].get<double>(), 0.0);
}

TEST_F(Cli, MleFromFiles) {
  ASSERT_EQ(run("simulate --n 2000 --delta 0.02 --seed 2 --out " + file("p.csv")).code, 0);
  const CliResult from_path = run("mle --input " + file("p.csv"));
  ASSERT_EQ(from_path.code, 0);
  const auto a = nlohmann::json::parse(from_path.out)["result"];
  EXPECT_TRUE(a["converged"].get<bool>());
  EXPECT_EQ(a["n"], 2000);

  // same data as a column of increments
  std::ifstream in(file("p.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<double> x;
  while (std::getline(in, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
    x.push_back(std::stod(line.substr(c2 + 1, c3 - c2 - 1)));
  }
  std::ofstream out(file("inc.csv"));
  out << "# delta=0.02\nincrement\n";
  for (std::size_t k = 1; k < x.size(); ++k) out << jumplan::format_double(x[k] - x[k - 1]) << '\n';
  out.close();
  const CliResult from_inc = run("mle --input " + file("inc.csv"));
  ASSERT_EQ(from_inc.code, 0);
  const auto b = nlohmann::json::parse(from_inc.out)["result"];
  EXPECT_EQ(a["params_hat"], b["params_hat"]);
}

TEST_F(Cli, DecomposeAndLimits) {
  const CliResult d = run("decompose --seed 3 --n 500");
  ASSERT_EQ(d.code, 0);
  EXPECT_LT(nlohmann::json::parse(d.out)["result"]["residual"].get<double>(), 1e-5);
  const CliResult l = run("limits --seed 1 --n-list 200,400,800 --replicates 5 --format csv");
  ASSERT_EQ(l.code, 0);
  EXPECT_EQ(l.out.substr(0, 6), "claim,");
}
