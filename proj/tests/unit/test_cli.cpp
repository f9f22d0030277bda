#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "splitting/cli.hpp"

namespace fs = std::filesystem;
using splitting::cli::run;

namespace {

const fs::path kData = SPLITTING_TEST_DATA;

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "splitting");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("splitting_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("analyze reports Knuth's lattice") {
  const auto out = fresh_dir("analyze");
  REQUIRE(invoke({"analyze", "--spec", (kData / "knuth.json").string(), "--out", out.string(), "--grid", "16"}) == 0);
  const auto span = nlohmann::json::parse(slurp(out / "span.json"));
  CHECK(span["arithmetic"] == true);
  CHECK(std::abs(span["lambda"].get<double>() - std::log(2.0)) < 1e-15);
  CHECK(span["base"] == "1/2");
  const auto asym = nlohmann::json::parse(slurp(out / "asymptotics.json"));
  CHECK(std::abs(asym["limit_constant"].get<double>() - 2.0 / std::log(2.0)) < 1e-14);
  CHECK(csv_rows(slurp(out / "F_profile.csv")).size() == 17);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "analyze");
  CHECK(manifest["seed"] == 0);
  CHECK(manifest["outputs"].size() == 4);
  CHECK(manifest.contains("timestamp"));
}

TEST_CASE("non-arithmetic specs get no profile") {
  const auto out = fresh_dir("analyze_biased");
  REQUIRE(invoke({"analyze", "--spec", (kData / "biased_binary.json").string(), "--out", out.string()}) == 0);
  CHECK_FALSE(fs::exists(out / "F_profile.csv"));
  const auto asym = nlohmann::json::parse(slurp(out / "asymptotics.json"));
  CHECK(asym["profile"].is_null());
}

TEST_CASE("exit codes for bad input") {
  const auto out = fresh_dir("errors");
  CHECK(invoke({"analyze", "--spec", (kData / "bad_branch_sum.json").string(), "--out", out.string()}) == 2);
  CHECK(invoke({"analyze", "--spec", (kData / "missing_weights.json").string(), "--out", out.string()}) == 2);
  CHECK(invoke({"analyze", "--spec", (kData / "no_such_file.json").string(), "--out", out.string()}) == 2);
  CHECK(invoke({"exact", "--spec", (kData / "knuth.json").string(), "--out", out.string(), "--n-max", "5",
                "--mode", "bogus"}) == 2);
  CHECK(invoke({"frobnicate"}) == 2);
  CHECK(invoke({"exact", "--spec", (kData / "knuth.json").string(), "--out", out.string(), "--n-max",
                "100000"}) == 4);
}

TEST_CASE("undecidable span exits with 3") {
  const auto out = fresh_dir("undecidable");
  fs::create_directories(out);
  const auto spec = out / "spec.json";
  std::ofstream(spec) << R"({"D": 2, "branch": [{"degree": 2, "prob": "1/1"}],
    "weights": {"2": {"type": "deterministic", "vector": ["1/1000000000039", "1000000000038/1000000000039"]}}})";
  CHECK(invoke({"analyze", "--spec", spec.string(), "--out", (out / "run").string()}) == 3);
  const auto span = nlohmann::json::parse(slurp(out / "run" / "span.json"));
  CHECK(span["kind"] == "undecidable");
}

TEST_CASE("exact table and closed form") {
  const auto out = fresh_dir("exact");
  REQUIRE(invoke({"exact", "--spec", (kData / "knuth.json").string(), "--out", out.string(), "--n-max", "64"}) == 0);
  const auto table = csv_rows(slurp(out / "cost_table.csv"));
  REQUIRE(table.size() == 66);
  CHECK(table[3] == std::vector<std::string>{"2", "5/1", "exact"});
  CHECK(table[4] == std::vector<std::string>{"3", "23/3", "exact"});
  const auto delta = csv_rows(slurp(out / "delta.csv"));
  REQUIRE(delta.size() == 66);
  for (std::size_t i = 1; i < delta.size(); ++i) CHECK(std::abs(std::stod(delta[i][3])) <= 1e-10);
}

TEST_CASE("thread count never changes outputs") {
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--spec", (kData / "mixed_degree.json").string(), "--n", "30", "--replicas", "2000", "--seed", "3"},
      {"converge", "--spec", (kData / "knuth.json").string(), "--source", "rep12", "--replicas", "500", "--k-max",
       "7"},
      {"study", "--spec", (kData / "knuth.json").string(), "--study", "lln", "--replicas", "50", "--x", "16,64"},
  };
  int idx = 0;
  for (const auto& cmd : commands) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "4"}) {
      auto args = cmd;
      const auto dir = fresh_dir("threads_" + std::to_string(idx) + "_" + threads);
      args.insert(args.end(), {"--out", dir.string(), "--threads", threads});
      const int rc = invoke(args);
      CHECK((rc == 0 || rc == 1));
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      CAPTURE(name.string());
      auto a = slurp(dirs[0] / name), b = slurp(dirs[1] / name);
      if (name == "manifest.json") {
        auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
        ja.erase("timestamp");
        jb.erase("timestamp");
        CHECK(ja == jb);
        CHECK_FALSE(ja["params"].contains("threads"));
      } else {
        CHECK(a == b);
      }
    }
    ++idx;
  }
}
