#pragma once

#include <json.hpp>

#include <filesystem>

#include "splitting/model.hpp"

namespace splitting {

/// Parses the JSON spec schema:
///   {"D": 2,
///    "branch": [{"degree": 2, "prob": "1/1"}],
///    "weights": {"2": {"type": "symmetric"}
///              | {"type": "deterministic", "vector": ["1/3", "2/3"]}
///              | {"type": "mixture", "cases": [{"prob": "1/2", "vector": [...]}]}}}
/// Schema problems throw SpecError carrying a JSON path such as
/// "$.branch[0].prob". Model rules are not checked here; see validate().
SplittingSpec parse_spec(const nlohmann::json& doc);

/// Parse plus validate; the first violation is reported as a SpecError.
SplittingSpec load_spec(const std::filesystem::path& path);

nlohmann::json spec_to_json(const SplittingSpec& spec);

}  // namespace splitting
