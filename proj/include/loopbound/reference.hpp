#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace loopbound {

/// Embedded reference values (published tables and cited constants).
const char* reference_json_text();
const nlohmann::ordered_json& reference_values();

/// Value of the cell with matching coordinates in section `path`, where
/// path is "tables/<id>", "beta_crit" or "external_beta_crit".
std::optional<double> reference_value(const std::string& path, const nlohmann::ordered_json& coords);

/// Tolerance recorded for a section, if any.
std::optional<double> reference_tolerance(const std::string& path);

}  // namespace loopbound
