#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(EDMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json last_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return Json::parse(last);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("edmc_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name = "") const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("tiny pipeline at full sampling solves in one record") {
  TempDir t;
  REQUIRE(run("generate --kind sphere --n 12 --r 3 --seed 1 --out " + t.str()) == 0);
  REQUIRE(run("sample --points " + t.str("points.csv") + " --p 1 --seed 2 --out " + t.str()) == 0);
  REQUIRE(run("init --samples " + t.str("samples.csv") + " --r 3 --out " + t.str()) == 0);
  REQUIRE(run("solve --samples " + t.str("samples.csv") + " --r 3 --truth " + t.str("points.csv") + " --out " +
              t.str()) == 0);
  const Json summary = last_line(t.path / "trace.jsonl");
  CHECK(summary["status"] == "converged");
  CHECK(summary["iterations"] == 1);
  CHECK(summary["final_truth_error"].get<double>() <= 1e-12);
  const Json s = Json::parse(slurp(t.path / "summary.json"));
  CHECK(s.contains("config_hash"));
  CHECK(s.contains("version"));
  CHECK(s.contains("seed"));
  REQUIRE(run("diagnose --points " + t.str("points.csv") + " --out " + t.str()) == 0);
  CHECK(fs::exists(t.path / "coherence.json"));
}

TEST_CASE("empty sample set gives a degenerate-init error file") {
  TempDir t;
  std::ofstream(t.path / "samples.csv") << "i,j,d\n";
  std::ofstream(t.path / "samples.json") << R"({"n": 8, "p": 0.1, "m": 0})";
  const int code = run("solve --samples " + t.str("samples.csv") + " --r 2 --out " + t.str());
  CHECK(code != 0);
  REQUIRE(fs::exists(t.path / "error.json"));
  const Json err = Json::parse(slurp(t.path / "error.json"));
  CHECK(err["error"] == "degenerate_init");
}

TEST_CASE("missing input file is a nonzero exit") {
  TempDir t;
  CHECK(run("sample --points " + t.str("nope.csv") + " --p 0.5 --out " + t.str()) != 0);
  CHECK(fs::exists(t.path / "error.json"));
}

TEST_CASE("single-cell grid at p = 1 succeeds in every trial") {
  TempDir t;
  REQUIRE(run("grid --kind sphere --n 20 --r_grid 3 --p_grid 1 --trials 3 --out " + t.str()) == 0);
  std::ifstream in(t.path / "grid.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::string extra;
  CHECK_FALSE(static_cast<bool>(std::getline(in, extra)));
  // success_fraction is the ninth column
  std::stringstream ss(row);
  std::string field;
  for (int k = 0; k < 9; ++k) std::getline(ss, field, ',');
  CHECK(std::stod(field) == 1.0);
}

TEST_CASE("config file supplies flags and reruns are bitwise identical") {
  TempDir a, b;
  std::ofstream(a.path / "gen.json") << R"({"kind": "ball", "n": 25, "r": 3, "seed": 9})";
  REQUIRE(run("generate --config " + a.str("gen.json") + " --out " + a.str()) == 0);
  REQUIRE(run("generate --config " + a.str("gen.json") + " --out " + b.str()) == 0);
  CHECK(slurp(a.path / "points.csv") == slurp(b.path / "points.csv"));
  CHECK(slurp(a.path / "points.json") == slurp(b.path / "points.json"));
  REQUIRE(run("sample --points " + a.str("points.csv") + " --p 0.6 --seed 4 --out " + a.str()) == 0);
  REQUIRE(run("sample --points " + a.str("points.csv") + " --p 0.6 --seed 4 --out " + b.str()) == 0);
  CHECK(slurp(a.path / "samples.csv") == slurp(b.path / "samples.csv"));
}
