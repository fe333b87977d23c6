#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = -1;
  std::string out;
};

// stdout only; stderr goes to /dev/null
CliRun run(const std::string &args) {
  const std::string cmd =
      std::string(QQLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE *p = popen(cmd.c_str(), "r");
  if (!p) {
    return r;
  }
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) {
    r.out.append(buf.data(), got);
  }
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::string> lines(const std::string &s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    out.push_back(line);
  }
  return out;
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qqlab_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(Cli, DensityGridShape) {
  const CliRun r = run("density --t 0.5 --x-min 0 --x-max 6 --points 241 "
                       "--samples 1000000 --seed 42");
  ASSERT_EQ(r.status, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 242u);
  EXPECT_EQ(ls.front(), "t,x,value,std_err");
  EXPECT_EQ(ls[1], "0.5,0,0,0");
  EXPECT_EQ(ls.back().rfind("0.5,6,", 0), 0u);
}

TEST_F(Cli, SameSeedSameBytes) {
  const std::string args =
      "density --t 0.3 --points 31 --samples 20000 --seed 5";
  const CliRun a = run(args + " --threads 1");
  const CliRun b = run(args + " --threads 3");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run("density --t 0.3 --points 31 --samples 20000 --seed 6")
                       .out);
}

TEST_F(Cli, SimulateQuickselectSmall) {
  const CliRun r =
      run("simulate quickselect --n 3 --m 2 --reps 20000 --seed 1");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["reference_exact"], "8/3");
  const double mean = j["mean"];
  const double se = j["std_err"];
  EXPECT_LE(std::abs(mean - 8.0 / 3.0), 4 * se);
  EXPECT_EQ(j["min"], 2.0);
  EXPECT_EQ(j["max"], 3.0);
}

TEST_F(Cli, SimulatePerpetuity) {
  const CliRun r = run("simulate v --reps 50000 --seed 3");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(std::abs(j["mean"].get<double>() - 4.0),
            4 * j["std_err"].get<double>());
  EXPECT_GT(j["min"].get<double>(), 2.0);
}

TEST_F(Cli, DickmanTable) {
  const CliRun r = run("dickman --x-min 0 --x-max 3 --points 7");
  ASSERT_EQ(r.status, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 8u);
  EXPECT_EQ(ls.front(), "x,rho,density,cdf");
  EXPECT_EQ(ls[1].rfind("0,1,", 0), 0u);
}

TEST_F(Cli, TailsAndSeries) {
  const CliRun mgf = run("tails --theta-max 1 --step 0.01");
  ASSERT_EQ(mgf.status, 0);
  EXPECT_EQ(lines(mgf.out).front(), "theta,log_m");
  EXPECT_EQ(lines(mgf.out).size(), 102u);
  const CliRun env = run("tails --what envelope --t 0.5 --x-min 3 --x-max 5 "
                         "--points 3");
  ASSERT_EQ(env.status, 0);
  EXPECT_EQ(lines(env.out).size(), 4u);
  const CliRun ser = run("series --k-max 3 --samples 5000");
  ASSERT_EQ(ser.status, 0);
  EXPECT_EQ(lines(ser.out).front(), "k,c,std_err,lower,upper");
  EXPECT_EQ(lines(ser.out).size(), 4u);
}

TEST_F(Cli, ConvergeRates) {
  const CliRun r = run("converge --t 0.3 --n 100,1000 --reps 3000");
  ASSERT_EQ(r.status, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 3u);
  EXPECT_EQ(ls.front(), "n,delta,d1,d1_se,d1_exact,dks,dks_se,bound");
}

TEST_F(Cli, ValidateQuickIdenticalAcrossThreads) {
  const CliRun a = run("validate --suite quick --seed 11 --threads 1");
  const CliRun b = run("validate --suite quick --seed 11 --threads 4");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  ASSERT_TRUE(j.is_array());
  for (const auto &c : j) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
  }
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  const fs::path cfg = dir_ / "run.ini";
  std::ofstream(cfg) << "samples=3000\npoints=11\nx-max=4\nseed=9\n";
  const fs::path out = dir_ / "grid.csv";
  const CliRun r = run("density --config " + cfg.string() +
                       " --points 21 --out " + out.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(lines(slurp(out)).size(), 22u);
  const fs::path manifest = dir_ / "grid.csv.manifest.json";
  ASSERT_TRUE(fs::exists(manifest));
  const auto j = nlohmann::json::parse(slurp(manifest));
  EXPECT_EQ(j["config"]["samples"], 3000);
  EXPECT_EQ(j["config"]["points"], 21);
  EXPECT_EQ(j["config"]["x_max"], 4.0);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["exit_status"], 0);
  EXPECT_TRUE(j.contains("versions"));
  EXPECT_TRUE(j.contains("wall_time_seconds"));
}

TEST_F(Cli, ExplicitManifestPath) {
  const fs::path manifest = dir_ / "m.json";
  const CliRun r = run("dickman --points 3 --manifest " + manifest.string());
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(slurp(manifest));
  EXPECT_EQ(j["command"], "dickman");
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("simulate quickselect --n 3 --bogus").status, 2);
  EXPECT_EQ(run("dickman --t 0.3").status, 2);
  EXPECT_EQ(run("simulate heapsort --n 3").status, 2);
  EXPECT_EQ(run("simulate quickselect --n 3 --m 5").status, 2);
  EXPECT_EQ(run("density --t 1").status, 2);
  EXPECT_EQ(run("tails --theta-max 9").status, 2);
  EXPECT_EQ(run("").status, 2);
  const fs::path cfg = dir_ / "bad.ini";
  std::ofstream(cfg) << "nonsense=1\n";
  EXPECT_EQ(run("dickman --config " + cfg.string()).status, 2);
}

TEST_F(Cli, NumericalGuardExitsThree) {
  EXPECT_EQ(run("converge --t 0.3 --n 100 --reps 2000 --ld-x 9").status, 3);
}

TEST_F(Cli, HelpAndVersion) {
  EXPECT_EQ(run("--help").status, 0);
  const CliRun v = run("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_FALSE(v.out.empty());
}

} // namespace
