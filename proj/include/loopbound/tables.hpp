#pragma once

#include <cstdint>

#include "loopbound/quadrature.hpp"
#include "loopbound/run_record.hpp"

namespace loopbound {

struct TableOptions {
  double precision = 1.0;  // >1 refines every quadrature rule
  std::uint64_t seed = 0x5EEDu;
};

/// Nearest-neighbour bound at β = ∞, u = 0 for θ = 2..5, d = 1..9.
RunRecord table1(const TableOptions& options);
/// Same at u = 1/2 for θ = 2..5 (independent of d).
RunRecord table2(const TableOptions& options);
/// Finite-range bounds m = 2..5 and the m → ∞ bound, θ = 2, u = 1/2, d = 1..5.
RunRecord table3(const TableOptions& options);
/// γ thresholds for d = 3..7 by both methods.
RunRecord table4(const TableOptions& options);
/// Dispatches on id 1..4; PreconditionError otherwise.
RunRecord make_table(int id, const TableOptions& options);

/// Quadrature rule used by the tables for dimension d.
QuadratureSpec table_spec(int d, const TableOptions& options);

}  // namespace loopbound
