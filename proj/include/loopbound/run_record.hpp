#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace loopbound {

using Json = nlohmann::ordered_json;

struct Cell {
  Json coords = Json::object();
  double value = 0.0;
  double error = 0.0;
  Json details = Json::object();  // optional extras (maximisers, routes, components)
  std::optional<double> paper;
};

/// Output of one CLI command: every number together with the parameters,
/// quadrature settings and seed that produced it.
struct RunRecord {
  std::string command;
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::string version = LOOPBOUND_VERSION;
  std::vector<Cell> cells;
  std::optional<Json> paper_deltas;
  std::optional<double> wall_time_seconds;

  /// Attaches reference values from `path` (see reference_value) and the
  /// maximum absolute deviation over the cells that have one.
  void compare_with_reference(const std::string& path);

  Json to_json() const;
  /// Long format: one row per cell, coordinate columns then value, error
  /// (and paper, delta when compared).
  std::string to_csv() const;
};

/// Number formatting shared by the JSON and CSV writers.
std::string format_number(double value);

}  // namespace loopbound
