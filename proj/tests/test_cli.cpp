#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "icea/cli.hpp"

namespace fs = std::filesystem;

namespace {

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"icea"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return icea::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("icea_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

}  // namespace

TEST_CASE("gen-data writes a deterministic dataset") {
  TempDir dir("gen");
  fs::path csv = dir.path / "data.csv";
  CHECK(cli({"gen-data", "--rule", "friedman2", "--n", "500", "--noise", "0",
             "--seed", "7", "--out", csv.string()}) == 0);

  std::string first = slurp(csv);
  CHECK(std::count(first.begin(), first.end(), '\n') == 501);  // header + rows

  CHECK(cli({"gen-data", "--rule", "friedman2", "--n", "500", "--noise", "0",
             "--seed", "7", "--out", csv.string()}) == 0);
  CHECK(slurp(csv) == first);
  CHECK(fs::exists(dir.path / "data.csv.meta.json"));
}

TEST_CASE("gen-data rejects n = 0 and unknown rules") {
  TempDir dir("genbad");
  fs::path csv = dir.path / "data.csv";
  CHECK(cli({"gen-data", "--rule", "friedman1", "--n", "0", "--out", csv.string()}) == 1);
  CHECK(cli({"gen-data", "--rule", "nope", "--n", "10", "--out", csv.string()}) == 1);
  CHECK(cli({"gen-data"}) == 1);  // missing --out
}

TEST_CASE("train runs ICEA end to end and reruns byte-identically") {
  TempDir dir("train");
  fs::path out = dir.path / "run";
  std::vector<std::string> args = {
      "train",        "--algo",       "icea",  "--rule",  "friedman1",
      "--n",          "600",          "--seed", "11",     "--normalize",
      "--train-rows", "400",          "--test-rows", "200", "--split-seed", "3",
      "--system",     "2",            "--max-updates", "30", "--eps", "1e-9",
      "--out",        out.string()};
  int code = cli(args);
  CHECK((code == 0 || code == 2));

  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "run.json"));
  CHECK(fs::exists(out / "models" / "agent_0.json"));
  CHECK(fs::exists(out / "models" / "agent_2.json"));

  std::string metrics = slurp(out / "metrics.csv");
  std::string info = slurp(out / "run.json");
  CHECK(info.find("\"algo\": \"icea\"") != std::string::npos);
  CHECK(info.find("memory_audit") != std::string::npos);

  CHECK(cli(args) == code);
  CHECK(slurp(out / "metrics.csv") == metrics);
  CHECK(slurp(out / "run.json") == info);
}

TEST_CASE("train exit code 2 signals an exhausted budget") {
  TempDir dir("budget");
  // friedman1 keeps improving well past 4 updates at this eps
  CHECK(cli({"train", "--algo", "boost", "--rule", "friedman1", "--n", "300",
             "--seed", "5", "--max-updates", "4", "--eps", "1e-12", "--out",
             (dir.path / "run").string()}) == 2);
}

TEST_CASE("train audits test isolation") {
  TempDir dir("audit");
  CHECK(cli({"train", "--algo", "icea", "--rule", "friedman1", "--n", "400", "--seed",
             "13", "--train-rows", "250", "--test-rows", "150", "--system", "1",
             "--max-updates", "15", "--audit-test-isolation", "--out",
             (dir.path / "run").string()}) != 1);
  std::string info = slurp(dir.path / "run" / "run.json");
  CHECK(info.find("\"test_isolation\": \"verified\"") != std::string::npos);
}

TEST_CASE("train over the socket carrier matches in-process bytes") {
  TempDir dir("carrier");
  std::vector<std::string> base = {
      "train", "--algo", "icea", "--rule", "friedman1", "--n",   "300",
      "--seed", "17",    "--train-rows", "200", "--test-rows", "100",
      "--system", "3",   "--max-updates", "12", "--eps", "1e-9"};

  auto run_with = [&](const std::string& carrier, const fs::path& out) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--carrier", carrier, "--out", out.string()});
    return cli(args);
  };
  int a = run_with("inproc", dir.path / "a");
  int b = run_with("socket", dir.path / "b");
  CHECK(a == b);
  CHECK(slurp(dir.path / "a" / "metrics.csv") == slurp(dir.path / "b" / "metrics.csv"));
}

TEST_CASE("train requires an assignment for icea and validates the algo") {
  TempDir dir("trainbad");
  CHECK(cli({"train", "--algo", "icea", "--rule", "friedman1", "--n", "100", "--out",
             (dir.path / "x").string()}) == 1);
  CHECK(cli({"train", "--algo", "nope", "--system", "1", "--rule", "friedman1", "--n",
             "100", "--out", (dir.path / "y").string()}) == 1);
}

TEST_CASE("train accepts explicit agent sets and the hierarchical algo") {
  TempDir dir("hier");
  CHECK(cli({"train", "--algo", "hier", "--rule", "friedman1", "--n", "400", "--seed",
             "19", "--train-rows", "250", "--test-rows", "150", "--agents", "0,1;1,2;3,4",
             "--max-updates", "20", "--out", (dir.path / "run").string()}) != 1);
  CHECK(fs::exists(dir.path / "run" / "models" / "stage1_agent_0.json"));
  CHECK(fs::exists(dir.path / "run" / "models" / "stage2.json"));
  CHECK(fs::exists(dir.path / "run" / "stage1_metrics_2.csv"));
}

TEST_CASE("exact-demo defaults reproduce the reference trajectory") {
  TempDir dir("demo");
  fs::path csv = dir.path / "table.csv";
  CHECK(cli({"exact-demo", "--out", csv.string()}) == 0);
  std::string table = slurp(csv);
  CHECK(table.find("1.4941406250") != std::string::npos);
  CHECK(table.find("-0.6563*x2^1 + 0.4688*x2^3") != std::string::npos);
  CHECK(table.find("# log_surplus_slope rounds 2-8: -2.77") != std::string::npos);
}

TEST_CASE("exact-demo handles rho 0 and rejects bad input") {
  CHECK(cli({"exact-demo", "--rho", "0", "--rounds", "10"}) == 0);
  CHECK(cli({"exact-demo", "--rho", "3/2"}) == 1);
  CHECK(cli({"exact-demo", "--phi", "x1*"}) == 1);
  CHECK(cli({"exact-demo", "--eps", "0"}) == 1);
}

TEST_CASE("report summarizes runs and emits curve files") {
  TempDir dir("report");
  fs::path run_a = dir.path / "boost_run";
  fs::path run_b = dir.path / "icea_run";
  REQUIRE(cli({"train", "--algo", "boost", "--rule", "friedman1", "--n", "300", "--seed",
               "23", "--train-rows", "200", "--test-rows", "100", "--max-updates", "10",
               "--out", run_a.string()}) != 1);
  REQUIRE(cli({"train", "--algo", "icea", "--system", "1", "--rule", "friedman1", "--n",
               "300", "--seed", "23", "--train-rows", "200", "--test-rows", "100",
               "--max-updates", "10", "--out", run_b.string()}) != 1);

  fs::path out = dir.path / "summary";
  CHECK(cli({"report", (run_a / "metrics.csv").string(),
             (run_b / "metrics.csv").string(), "--out", out.string()}) == 0);

  std::string summary = slurp(out / "summary.csv");
  CHECK(summary.find("dataset,system,algo,train_mse,test_mse,updates,leaves_total") == 0);
  CHECK(summary.find("friedman1,-,boost") != std::string::npos);
  CHECK(summary.find("friedman1,1,icea") != std::string::npos);
  CHECK(fs::exists(out / "boost_run_curve.csv"));
  CHECK(fs::exists(out / "icea_run_curve.csv"));
  CHECK_FALSE(fs::exists(out / "violations.txt"));

  std::string curve = slurp(out / "icea_run_curve.csv");
  CHECK(curve.find("update,round,train_mse,test_mse") == 0);

  CHECK(cli({"report", (dir.path / "missing.csv").string(), "--out", out.string()}) == 1);
}

TEST_CASE("report flags monotonicity violations") {
  TempDir dir("violate");
  fs::path bad = dir.path / "metrics.csv";
  std::ofstream out(bad);
  out << "update,round,agent,train_mse,test_mse,leaves,messages,scalars_sent\n"
      << "1,1,0,1.5,,1,2,10\n"
      << "2,2,0,2.5,,1,2,10\n";  // MSE went up
  out.close();
  fs::path rep = dir.path / "rep";
  CHECK(cli({"report", bad.string(), "--out", rep.string()}) == 0);
  CHECK(fs::exists(rep / "violations.txt"));
  CHECK(slurp(rep / "violations.txt").find("update 2") != std::string::npos);
}
