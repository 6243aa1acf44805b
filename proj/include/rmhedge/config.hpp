#pragma once

#include "rmhedge/errors.hpp"
#include "rmhedge/io.hpp"

#include "json.hpp"

#include <string>

namespace rmhedge {

/// Parse the TOML subset used by scenario files: [tables], [a.b] headers,
/// dotted keys, basic strings, integers, floats, booleans, (nested) arrays and
/// inline tables, '#' comments. Errors carry the line number and key.
nlohmann::json parse_toml(const std::string& text);

/// Read a scenario file; '.json' goes through nlohmann/json, anything else is TOML.
nlohmann::json load_config_file(const std::string& path);

}  // namespace rmhedge
