#include "loopbound/tables.hpp"

#include <cmath>
#include <string>

#include "loopbound/bounds.hpp"
#include "loopbound/errors.hpp"
#include "loopbound/parallel.hpp"

namespace loopbound {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

Json spec_json(const QuadratureSpec& spec) {
  Json j = Json::object();
  j["method"] = to_string(spec.method);
  if (spec.method == QuadratureMethod::TensorChebyshev) {
    j["nodes_per_axis"] = spec.nodes_per_axis;
  } else {
    j["sample_count"] = spec.sample_count;
    j["replicates"] = spec.replicates;
  }
  return j;
}

RunRecord base_record(int id, const TableOptions& options) {
  RunRecord record;
  record.command = "table " + std::to_string(id);
  record.seed = options.seed;
  record.params["table"] = id;
  record.params["precision"] = options.precision;
  return record;
}

std::string m_label(int m) { return m == 0 ? "inf" : std::to_string(m); }

}  // namespace

QuadratureSpec table_spec(int d, const TableOptions& options) {
  auto spec = default_spec(d, options.precision);
  spec.seed = options.seed;
  return spec;
}

RunRecord table1(const TableOptions& options) {
  auto record = base_record(1, options);
  record.params["u"] = 0.0;
  record.params["beta"] = "inf";
  Json specs = Json::object();
  constexpr int kMaxD = 9;
  std::vector<AlphaSup> sups(kMaxD);
  parallel_for(kMaxD, [&](std::size_t i) {
    const int d = static_cast<int>(i) + 1;
    sups[i] = sup_alpha_I(CoefficientVector({1.0, -1.0}), 0.0, d, table_spec(d, options));
  });
  for (int d = 1; d <= kMaxD; ++d) specs[std::to_string(d)] = spec_json(table_spec(d, options));
  record.params["quadrature"] = specs;
  for (int theta = 2; theta <= 5; ++theta) {
    for (int d = 1; d <= kMaxD; ++d) {
      const auto& sup = sups[static_cast<std::size_t>(d - 1)];
      const double scale = theta / (2.0 * kSqrt2);
      const double zeta = scale * sup.value;
      const double dz = scale * sup.error;
      Cell cell;
      cell.coords = {{"theta", theta}, {"d", d}};
      cell.value = quadratic_root_bound(zeta, 0.0);
      cell.error = std::abs(quadratic_root_bound(zeta + dz, 0.0) -
                            quadratic_root_bound(std::max(zeta - dz, 0.0), 0.0)) / 2.0;
      cell.details = {{"I", sup.value}, {"alpha", sup.argmax}, {"route", to_string(sup.route)}};
      record.cells.push_back(std::move(cell));
    }
  }
  return record;
}

RunRecord table2(const TableOptions& options) {
  auto record = base_record(2, options);
  record.params["u"] = 0.5;
  record.params["beta"] = "inf";
  for (int theta = 2; theta <= 5; ++theta) {
    ModelParams p;
    p.theta = theta;
    p.u = 0.5;
    const auto r = nn_lower_bound(p, table_spec(p.d, options));
    Cell cell;
    cell.coords = {{"theta", theta}};
    cell.value = r.value;
    cell.error = r.error_estimate;
    cell.details = {{"I", r.components.at("I")}};
    record.cells.push_back(std::move(cell));
  }
  return record;
}

RunRecord table3(const TableOptions& options) {
  auto record = base_record(3, options);
  record.params["theta"] = 2;
  record.params["u"] = 0.5;
  record.params["beta"] = "inf";
  Json specs = Json::object();
  for (int d = 1; d <= 5; ++d) specs[std::to_string(d)] = spec_json(table_spec(d, options));
  record.params["quadrature"] = specs;
  const std::vector<int> ms = {2, 3, 4, 5, 0};
  std::vector<std::pair<int, int>> jobs;
  for (int d = 1; d <= 5; ++d) {
    for (int m : ms) jobs.emplace_back(d, m);
  }
  std::vector<BoundResult> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    ModelParams p;
    p.d = jobs[i].first;
    p.theta = 2;
    p.u = 0.5;
    const auto spec = table_spec(p.d, options);
    const int m = jobs[i].second;
    results[i] = m == 0 ? long_range_bound(p, spec) : finite_range_bound(m, p, spec);
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = results[i];
    Cell cell;
    cell.coords = {{"d", jobs[i].first}, {"m", m_label(jobs[i].second)}};
    cell.value = r.value;
    cell.error = r.error_estimate;
    if (r.argmax_eta) cell.details["eta"] = *r.argmax_eta;
    for (const auto& [k, v] : r.components) cell.details[k] = v;
    record.cells.push_back(std::move(cell));
  }
  return record;
}

RunRecord table4(const TableOptions& options) {
  auto record = base_record(4, options);
  constexpr double kTol = 5e-3;
  record.params["bisection_tolerance"] = kTol;
  Json specs = Json::object();
  for (int d = 3; d <= 7; ++d) specs[std::to_string(d)] = spec_json(table_spec(d, options));
  record.params["quadrature"] = specs;
  struct Row {
    double ueltschi = 0.0, fresh = 0.0, closed = 0.0;
  };
  std::vector<Row> rows(5);
  parallel_for(rows.size(), [&](std::size_t i) {
    const int d = static_cast<int>(i) + 3;
    const GammaAnalysis analysis(d, table_spec(d, options));
    rows[i] = {analysis.threshold(GammaMethod::Ueltschi, kTol), analysis.threshold(GammaMethod::New, kTol),
               analysis.ueltschi_closed_form()};
  });
  for (auto method : {GammaMethod::Ueltschi, GammaMethod::New}) {
    for (int d = 3; d <= 7; ++d) {
      const auto& row = rows[static_cast<std::size_t>(d - 3)];
      Cell cell;
      cell.coords = {{"d", d}, {"method", to_string(method)}};
      cell.value = method == GammaMethod::Ueltschi ? row.ueltschi : row.fresh;
      cell.error = kTol / 2.0;
      if (method == GammaMethod::Ueltschi) cell.details["closed_form"] = row.closed;
      record.cells.push_back(std::move(cell));
    }
  }
  return record;
}

RunRecord make_table(int id, const TableOptions& options) {
  switch (id) {
    case 1: return table1(options);
    case 2: return table2(options);
    case 3: return table3(options);
    case 4: return table4(options);
    default: throw PreconditionError("table id must be 1, 2, 3 or 4");
  }
}

}  // namespace loopbound
