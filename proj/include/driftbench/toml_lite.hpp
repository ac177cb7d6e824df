#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace driftbench::toml_lite {

// Minimal TOML reader covering the subset used by the shipped config files:
// comments, [table] / [[array-of-tables]] headers with dotted paths, bare or
// quoted keys, strings, integers, floats, booleans, and (possibly multiline)
// arrays. Inline tables and datetimes are not supported. The result is the
// equivalent JSON document.
nlohmann::json parse(const std::string& text, const std::string& origin);

// Dispatches on extension: .toml through the subset parser, anything else
// parsed as JSON.
nlohmann::json load_config_file(const std::filesystem::path& path);

} // namespace driftbench::toml_lite
