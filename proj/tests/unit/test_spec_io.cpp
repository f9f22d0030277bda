#include <doctest.h>

#include <string>

#include "splitting/errors.hpp"
#include "splitting/spec_io.hpp"

using namespace splitting;

namespace {

const std::string kData = SPLITTING_TEST_DATA;

std::string load_error(const nlohmann::json& doc) {
  try {
    parse_spec(doc);
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("load_spec: Knuth file") {
  const auto s = load_spec(kData + "/knuth.json");
  CHECK(s.threshold == 2);
  REQUIRE(s.branch.size() == 1);
  CHECK(s.branch[0].degree == 2);
  CHECK(s.branch[0].prob == Rational(1));
}

TEST_CASE("load_spec: branch probabilities must sum to one") {
  try {
    load_spec(kData + "/bad_branch_sum.json");
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()) == "branch probabilities sum ≠ 1 at $.branch");
  }
}

TEST_CASE("load_spec: a declared degree without a weight law is named") {
  try {
    load_spec(kData + "/missing_weights.json");
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("degree 3") != std::string::npos);
  }
}

TEST_CASE("parse_spec: schema errors carry a JSON path") {
  using nlohmann::json;
  const json good = json::parse(R"({"D": 2, "branch": [{"degree": 2, "prob": "1/1"}],
                                     "weights": {"2": {"type": "symmetric"}}})");
  CHECK(load_error(good).empty());

  auto bad = good;
  bad["branch"][0]["prob"] = 0.5;
  CHECK(load_error(bad).find("$.branch[0].prob") != std::string::npos);

  bad = good;
  bad["weights"]["2"] = {{"type", "deterministic"}, {"vector", {"1/2", "x"}}};
  CHECK(load_error(bad).find("$.weights.2.vector[1]") != std::string::npos);

  bad = good;
  bad.erase("D");
  CHECK(load_error(bad) == "missing field \"D\" at $");

  bad = good;
  bad["weights"]["2"] = {{"type", "spiral"}};
  CHECK(load_error(bad).find("$.weights.2.type") != std::string::npos);
}

TEST_CASE("spec_to_json round-trips") {
  for (const char* name : {"knuth", "biased_binary", "mixed_degree", "ternary_d3"}) {
    CAPTURE(name);
    const auto s = load_spec(kData + "/" + name + ".json");
    const auto again = parse_spec(spec_to_json(s));
    CHECK(spec_to_json(again) == spec_to_json(s));
  }
}
