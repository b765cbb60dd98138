#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "heppo/report_io.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = heppo::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

} // namespace

TEST_CASE("gae subcommand") {
  const auto input = temp_file("heppo_cli_gae.json",
                               R"([{"rewards": [1, 1, 1], "values": [0, 0, 0], "bootstrap": 0}])");
  const auto r = run({"gae", "--input", input.string(), "--gamma", "0.5", "--lambda", "0.5"});
  REQUIRE(r.code == 0);
  const auto doc = heppo::Json::parse(r.out);
  CHECK(doc["trajectories"][0]["advantages"] == heppo::Json::array({1.3125, 1.25, 1.0}));
  CHECK(doc["trajectories"][0]["rtgs"] == heppo::Json::array({1.3125, 1.25, 1.0}));

  const auto csv = run({"gae", "--input", input.string(), "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("trajectory,t,", 0) == 0);
}

TEST_CASE("invalid inputs exit with code 2") {
  const auto bad = temp_file("heppo_cli_bad.json", R"([{"rewards": [1, "x"], "values": [0, 0]}])");
  auto r = run({"gae", "--input", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("$[0].rewards[1]") != std::string::npos);

  r = run({"gae", "--input", "/nonexistent/file.json"});
  CHECK(r.code == 2);
  r = run({"profile", "--accelerate", "Nonsense=2"});
  CHECK(r.code == 2);
  r = run({"mem", "--element-bits", "8", "--writeback-bits", "16"});
  CHECK(r.code == 2);
  r = run({"hw", "--k", "0"});
  CHECK(r.code == 2);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code != 0);
  CHECK(run({"frobnicate"}).code != 0);
  CHECK(run({"variant", "--variant", "9"}).code != 0);
  CHECK(run({"hw", "--format", "xml"}).code != 0);
}

TEST_CASE("reports are deterministic") {
  const std::vector<std::vector<std::string>> commands{
      {"variant", "--traj", "4", "--steps", "64", "--seed", "11"},
      {"sweep", "--traj", "4", "--steps", "64", "--format", "csv"},
      {"hw"},
      {"mem", "--element-bits", "32"},
      {"profile", "--system", "cpu-only", "--format", "csv"}};
  for (const auto& cmd : commands) {
    const auto a = run(cmd);
    const auto b = run(cmd);
    CHECK(a.code == 0);
    CHECK(!a.out.empty());
    CHECK(a.out == b.out);
  }
}

TEST_CASE("figures reach the report") {
  const auto hw = heppo::Json::parse(run({"hw"}).out);
  CHECK(hw["trajectory_cycles"] == 1029);
  CHECK(hw["aggregate_elements_per_second"] == 1.92e10);

  const auto mem = heppo::Json::parse(run({"mem"}).out);
  CHECK(mem["total_bytes_per_cycle"] == 256);
  CHECK(mem["storage_blocks"] == 29);
  CHECK(mem["bandwidth_blocks"] == 32);

  const auto prof = heppo::Json::parse(run({"profile"}).out);
  CHECK(std::abs(prof["time_reduction_percent"].get<double>() - 29.96) <= 0.01);
}

TEST_CASE("--out writes the report to a file") {
  const auto path = std::filesystem::temp_directory_path() / "heppo_cli_out.json";
  std::filesystem::remove(path);
  const auto r = run({"hw", "--out", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == run({"hw"}).out);
}
