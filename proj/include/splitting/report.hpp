#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace splitting {

/// Shortest form that still round-trips: "%.17g".
std::string fmt17(double v);

/// Pretty-printed JSON with every float written through fmt17.
std::string dump_json(const nlohmann::ordered_json& j);

/// Writes via a temporary sibling file and rename, so a reader never sees a
/// half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace splitting
