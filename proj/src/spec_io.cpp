#include "splitting/spec_io.hpp"

#include <fstream>

#include "splitting/errors.hpp"

namespace splitting {

using nlohmann::json;

namespace {

Rational parse_rational(const json& j, const std::string& path) {
  if (!j.is_string()) throw SpecError(path, "expected a \"num/den\" string");
  const auto text = j.get<std::string>();
  auto r = Rational::parse(text);
  if (!r) throw SpecError(path, "malformed rational \"" + text + "\"");
  return *r;
}

std::vector<Rational> parse_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw SpecError(path, "expected an array of rationals");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_rational(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

const json& member(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SpecError(path, std::string("missing field \"") + key + "\"");
  return *it;
}

WeightLaw parse_law(const json& j, const std::string& path) {
  if (!j.is_object()) throw SpecError(path, "expected an object");
  const auto& type = member(j, "type", path);
  if (!type.is_string()) throw SpecError(path + ".type", "expected a string");
  const auto t = type.get<std::string>();
  if (t == "symmetric") return SymmetricWeights{};
  if (t == "deterministic") {
    return DeterministicWeights{parse_vector(member(j, "vector", path), path + ".vector")};
  }
  if (t == "mixture") {
    const auto& cases = member(j, "cases", path);
    if (!cases.is_array()) throw SpecError(path + ".cases", "expected an array");
    MixtureWeights mix;
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto cpath = path + ".cases[" + std::to_string(c) + "]";
      if (!cases[c].is_object()) throw SpecError(cpath, "expected an object");
      mix.cases.push_back({parse_rational(member(cases[c], "prob", cpath), cpath + ".prob"),
                           parse_vector(member(cases[c], "vector", cpath), cpath + ".vector")});
    }
    return mix;
  }
  throw SpecError(path + ".type", "unknown weight law type \"" + t + "\"");
}

json vector_json(const std::vector<Rational>& w) {
  json out = json::array();
  for (const auto& v : w) out.push_back(v.str());
  return out;
}

}  // namespace

SplittingSpec parse_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("$", "expected a JSON object");
  SplittingSpec spec;

  const auto& d = member(doc, "D", "$");
  if (!d.is_number_integer()) throw SpecError("$.D", "expected an integer");
  spec.threshold = d.get<int>();

  const auto& branch = member(doc, "branch", "$");
  if (!branch.is_array()) throw SpecError("$.branch", "expected an array");
  for (std::size_t i = 0; i < branch.size(); ++i) {
    const auto path = "$.branch[" + std::to_string(i) + "]";
    const auto& e = branch[i];
    if (!e.is_object()) throw SpecError(path, "expected an object");
    const auto& deg = member(e, "degree", path);
    if (!deg.is_number_integer()) throw SpecError(path + ".degree", "expected an integer");
    spec.branch.push_back({deg.get<int>(), parse_rational(member(e, "prob", path), path + ".prob")});
  }

  const auto& weights = member(doc, "weights", "$");
  if (!weights.is_object()) throw SpecError("$.weights", "expected an object");
  for (const auto& [key, law] : weights.items()) {
    const auto path = "$.weights." + key;
    int degree = 0;
    try {
      std::size_t used = 0;
      degree = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw SpecError(path, "weight key is not an integer degree");
    }
    spec.weights[degree] = parse_law(law, path);
  }
  return spec;
}

SplittingSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("$", "cannot open spec file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError("$", std::string("invalid JSON: ") + e.what());
  }
  auto spec = parse_spec(doc);
  const auto violations = validate(spec);
  if (!violations.empty()) throw SpecError("$." + violations.front().field, violations.front().rule);
  return spec;
}

json spec_to_json(const SplittingSpec& spec) {
  json doc;
  doc["D"] = spec.threshold;
  doc["branch"] = json::array();
  for (const auto& e : spec.branch) doc["branch"].push_back({{"degree", e.degree}, {"prob", e.prob.str()}});
  doc["weights"] = json::object();
  for (const auto& [degree, law] : spec.weights) {
    json j;
    if (std::holds_alternative<SymmetricWeights>(law)) {
      j["type"] = "symmetric";
    } else if (const auto* d = std::get_if<DeterministicWeights>(&law)) {
      j["type"] = "deterministic";
      j["vector"] = vector_json(d->weights);
    } else if (const auto* m = std::get_if<MixtureWeights>(&law)) {
      j["type"] = "mixture";
      j["cases"] = json::array();
      for (const auto& c : m->cases) j["cases"].push_back({{"prob", c.prob.str()}, {"vector", vector_json(c.weights)}});
    } else {
      j["type"] = std::get<RandomWeights>(law).label;
    }
    doc["weights"][std::to_string(degree)] = j;
  }
  return doc;
}

}  // namespace splitting
