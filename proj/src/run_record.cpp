#include "loopbound/run_record.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "loopbound/reference.hpp"

namespace loopbound {

const nlohmann::ordered_json& reference_values() {
  static const auto parsed = nlohmann::ordered_json::parse(reference_json_text());
  return parsed;
}

namespace {

const Json* section(const std::string& path) {
  const auto& root = reference_values();
  if (path.rfind("tables/", 0) == 0) {
    const auto id = path.substr(7);
    const auto& tables = root.at("tables");
    return tables.contains(id) ? &tables.at(id) : nullptr;
  }
  return root.contains(path) ? &root.at(path) : nullptr;
}

bool same_coords(const Json& a, const Json& b) {
  if (a.size() != b.size()) return false;
  for (auto it = a.begin(); it != a.end(); ++it) {
    if (!b.contains(it.key())) return false;
    const auto& other = b.at(it.key());
    if (it->is_number() && other.is_number()) {
      if (it->get<double>() != other.get<double>()) return false;
    } else if (*it != other) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<double> reference_value(const std::string& path, const Json& coords) {
  const Json* s = section(path);
  if (!s || !s->contains("cells")) return std::nullopt;
  for (const auto& cell : s->at("cells")) {
    if (same_coords(cell.at("coords"), coords)) return cell.at("value").get<double>();
  }
  return std::nullopt;
}

std::optional<double> reference_tolerance(const std::string& path) {
  const Json* s = section(path);
  if (!s || !s->contains("tolerance")) return std::nullopt;
  return s->at("tolerance").get<double>();
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  return Json(value).dump();
}

namespace {

Json number(double value) {
  if (std::isfinite(value)) return value;
  return format_number(value);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

Json sanitize(const Json& j) {
  if (j.is_number_float()) return number(j.get<double>());
  if (j.is_object() || j.is_array()) {
    Json out = j;
    for (auto& v : out) v = sanitize(v);
    return out;
  }
  return j;
}

}  // namespace

void RunRecord::compare_with_reference(const std::string& path) {
  double worst = 0.0;
  std::size_t matched = 0;
  for (auto& cell : cells) {
    cell.paper = reference_value(path, cell.coords);
    if (!cell.paper) continue;
    ++matched;
    worst = std::max(worst, std::abs(cell.value - *cell.paper));
  }
  Json deltas = Json::object();
  deltas["reference"] = path;
  deltas["cells_compared"] = matched;
  deltas["max_abs_deviation"] = worst;
  if (auto tol = reference_tolerance(path)) {
    deltas["tolerance"] = *tol;
    deltas["within_tolerance"] = worst <= *tol;
  }
  paper_deltas = deltas;
}

Json RunRecord::to_json() const {
  Json out = Json::object();
  out["command"] = command;
  out["params"] = sanitize(params);
  out["seed"] = seed;
  out["version"] = version;
  Json list = Json::array();
  for (const auto& cell : cells) {
    Json c = Json::object();
    c["coords"] = cell.coords;
    c["value"] = number(cell.value);
    c["error"] = number(cell.error);
    if (cell.paper) {
      c["paper"] = *cell.paper;
      c["delta"] = number(cell.value - *cell.paper);
    }
    if (!cell.details.empty()) c["details"] = sanitize(cell.details);
    list.push_back(std::move(c));
  }
  out["cells"] = std::move(list);
  if (paper_deltas) out["paper_deltas"] = *paper_deltas;
  if (wall_time_seconds) out["wall_time_seconds"] = *wall_time_seconds;
  return out;
}

std::string RunRecord::to_csv() const {
  std::ostringstream out;
  std::vector<std::string> keys;
  for (const auto& cell : cells) {
    for (auto it = cell.coords.begin(); it != cell.coords.end(); ++it) {
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
    }
  }
  bool compared = false;
  for (const auto& cell : cells) compared = compared || cell.paper.has_value();
  for (const auto& k : keys) out << k << ',';
  out << "value,error";
  if (compared) out << ",paper,delta";
  out << '\n';
  for (const auto& cell : cells) {
    for (const auto& k : keys) {
      if (cell.coords.contains(k)) {
        const auto& v = cell.coords.at(k);
        out << csv_field(v.is_string() ? v.get<std::string>() : v.dump());
      }
      out << ',';
    }
    out << format_number(cell.value) << ',' << format_number(cell.error);
    if (compared) {
      if (cell.paper) {
        out << ',' << format_number(*cell.paper) << ',' << format_number(cell.value - *cell.paper);
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace loopbound
