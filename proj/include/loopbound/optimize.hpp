#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "loopbound/errors.hpp"

namespace loopbound {

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal f on [a, b].
/// Stops once the bracket is narrower than tol; the endpoints are also
/// compared so a monotone f returns the better endpoint.
template <class F>
Extremum golden_max(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  Extremum best{a, f(a)};
  const double fb = f(b);
  if (fb > best.value) best = {b, fb};
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  if (f1 > best.value) best = {x1, f1};
  if (f2 > best.value) best = {x2, f2};
  return best;
}

template <class F>
Extremum golden_min(F&& f, double a, double b, double tol) {
  auto r = golden_max([&](double x) { return -f(x); }, a, b, tol);
  return {r.x, -r.value};
}

/// Maximum over a sorted grid followed by golden-section refinement on the
/// bracket around the best grid point.
template <class F>
Extremum grid_golden_max(F&& f, const std::vector<double>& grid, double tol) {
  if (grid.empty()) throw PreconditionError("empty search grid");
  std::vector<double> values(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = f(grid[i]);
    if (values[i] > values[best]) best = i;
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1 < grid.size() ? best + 1 : best];
  Extremum refined{grid[best], values[best]};
  if (hi > lo) {
    const auto g = golden_max(f, lo, hi, tol);
    if (g.value > refined.value) refined = g;
  }
  return refined;
}

template <class F>
Extremum grid_golden_min(F&& f, const std::vector<double>& grid, double tol) {
  auto r = grid_golden_max([&](double x) { return -f(x); }, grid, tol);
  return {r.x, -r.value};
}

inline std::vector<double> linear_grid(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  if (n > 1) g.back() = b;
  return g;
}

inline std::vector<double> log_grid(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  const double la = std::log(a);
  const double lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = n == 1 ? a : std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1));
  }
  g.front() = a;
  if (n > 1) g.back() = b;
  return g;
}

}  // namespace loopbound
