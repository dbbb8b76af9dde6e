#include "loopbound/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "loopbound/errors.hpp"
#include "loopbound/parallel.hpp"
#include "loopbound/sobol.hpp"
#include "loopbound/special.hpp"

namespace loopbound {
namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Calls fn(weight, x) for every nondecreasing index tuple whose first index
// is `first`. Weights are multinomial counts over n^d.
template <class Fn>
void enumerate_sorted(int d, const std::vector<double>& nodes, std::size_t first, Fn&& fn) {
  const std::size_t n = nodes.size();
  const double base = factorial(d) / std::pow(static_cast<double>(n), d);
  std::vector<double> inv_fact(d + 1);
  for (int i = 0; i <= d; ++i) inv_fact[i] = 1.0 / factorial(i);
  std::vector<std::size_t> idx(d, first);
  std::vector<double> x(d, nodes[first]);
  while (true) {
    double weight = base;
    int run = 1;
    for (int j = 1; j < d; ++j) {
      if (idx[j] == idx[j - 1]) {
        ++run;
      } else {
        weight *= inv_fact[run];
        run = 1;
      }
    }
    weight *= inv_fact[run];
    fn(weight, std::span<const double>(x));
    int p = d - 1;
    while (p >= 1 && idx[p] == n - 1) --p;
    if (p < 1) break;
    ++idx[p];
    for (int q = p + 1; q < d; ++q) idx[q] = idx[p];
    for (int q = p; q < d; ++q) x[q] = nodes[idx[q]];
  }
}

// Full tensor product with the first index fixed.
template <class Fn>
void enumerate_full(int d, const std::vector<double>& nodes, std::size_t first, Fn&& fn) {
  const std::size_t n = nodes.size();
  const double weight = 1.0 / std::pow(static_cast<double>(n), d);
  std::vector<std::size_t> idx(d, 0);
  idx[0] = first;
  std::vector<double> x(d, nodes[0]);
  x[0] = nodes[first];
  while (true) {
    fn(weight, std::span<const double>(x));
    int p = d - 1;
    while (p >= 1 && idx[p] == n - 1) --p;
    if (p < 1) break;
    ++idx[p];
    x[p] = nodes[idx[p]];
    for (int q = p + 1; q < d; ++q) {
      idx[q] = 0;
      x[q] = nodes[0];
    }
  }
}

std::vector<double> chebyshev_nodes(std::size_t n) {
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = chebyshev_node(i, n);
  return nodes;
}

std::vector<double> midpoint_nodes(std::size_t n) {
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = (static_cast<double>(i) + 0.5) * 2.0 * kPi / n;
  return nodes;
}

std::size_t coarse_count(std::size_t n) { return std::max<std::size_t>(1, n / 2); }

std::size_t points_per_replicate(const QuadratureSpec& spec) {
  return std::max<std::size_t>(1, spec.sample_count / spec.replicates);
}

double checked(double value, std::span<const double> node) {
  if (!std::isfinite(value)) {
    throw EvaluationError("integrand returned a non-finite value",
                          std::vector<double>(node.begin(), node.end()));
  }
  return value;
}

using PointMap = double (*)(double);

// Tensor sum over a 1D node list, parallel over the first index.
template <class F>
double tensor_sum(const F& f, int d, const std::vector<double>& nodes, bool symmetric) {
  std::vector<double> partial(nodes.size(), 0.0);
  parallel_for(nodes.size(), [&](std::size_t first) {
    KahanSum sum;
    auto body = [&](double w, std::span<const double> x) { sum.add(w * checked(f(x), x)); };
    if (symmetric) {
      enumerate_sorted(d, nodes, first, body);
    } else {
      enumerate_full(d, nodes, first, body);
    }
    partial[first] = sum.value();
  });
  return ordered_sum(partial);
}

template <class F>
QuadratureResult qmc_average(const F& f, int d, const QuadratureSpec& spec, PointMap map) {
  const std::size_t per = points_per_replicate(spec);
  std::vector<double> means(spec.replicates, 0.0);
  parallel_for(spec.replicates, [&](std::size_t r) {
    ScrambledSobol gen(d, spec.seed, r);
    ScrambledSobol::Cursor cursor(gen, 0);
    std::vector<double> x(d);
    KahanSum sum;
    for (std::size_t i = 0; i < per; ++i) {
      const auto u = cursor.current();
      for (int j = 0; j < d; ++j) x[j] = map(u[j]);
      sum.add(checked(f(std::span<const double>(x)), x));
      cursor.advance();
    }
    means[r] = sum.value() / static_cast<double>(per);
  });
  QuadratureResult result;
  result.value = ordered_sum(means) / static_cast<double>(means.size());
  if (means.size() > 1) {
    KahanSum ss;
    for (double m : means) ss.add((m - result.value) * (m - result.value));
    const double var = ss.value() / static_cast<double>(means.size() - 1);
    result.abs_error_estimate = std::sqrt(var / static_cast<double>(means.size()));
  }
  result.evaluations = static_cast<std::uint64_t>(per * spec.replicates);
  return result;
}

double to_angle(double u) { return 2.0 * kPi * u; }
double to_cosine(double u) { return std::cos(kPi * u); }

std::uint64_t tensor_count(std::size_t n, int d, bool symmetric) {
  if (!symmetric) return static_cast<std::uint64_t>(std::pow(static_cast<double>(n), d));
  // C(n + d - 1, d)
  double c = 1.0;
  for (int i = 1; i <= d; ++i) c = c * static_cast<double>(n + d - i) / i;
  return static_cast<std::uint64_t>(std::llround(c));
}

}  // namespace

std::string to_string(QuadratureMethod method) {
  return method == QuadratureMethod::TensorChebyshev ? "tensor-chebyshev" : "quasi-monte-carlo";
}

QuadratureMethod parse_method(const std::string& name) {
  if (name == "tensor-chebyshev" || name == "tensor") return QuadratureMethod::TensorChebyshev;
  if (name == "quasi-monte-carlo" || name == "qmc") return QuadratureMethod::QuasiMonteCarlo;
  throw PreconditionError("unknown quadrature method: " + name);
}

void QuadratureSpec::validate() const {
  if (nodes_per_axis < 2) throw PreconditionError("nodes_per_axis must be at least 2");
  if (sample_count < 1) throw PreconditionError("sample_count must be positive");
  if (replicates < 1) throw PreconditionError("replicates must be positive");
  if (!(target_abs_error > 0.0)) throw PreconditionError("target_abs_error must be positive");
}

QuadratureSpec default_spec(int d, double precision) {
  if (d < 1) throw PreconditionError("dimension must be positive");
  QuadratureSpec spec;
  static constexpr std::size_t kNodes[] = {0, 1u << 16, 2048, 256, 96, 48};
  if (d <= 5) {
    spec.method = QuadratureMethod::TensorChebyshev;
    spec.nodes_per_axis = kNodes[d];
  } else {
    spec.method = QuadratureMethod::QuasiMonteCarlo;
  }
  return precision == 1.0 ? spec : refined(spec, precision);
}

QuadratureSpec refined(const QuadratureSpec& spec, double factor) {
  if (!(factor > 0.0)) throw PreconditionError("refinement factor must be positive");
  QuadratureSpec out = spec;
  const auto nodes = static_cast<std::size_t>(std::llround(static_cast<double>(spec.nodes_per_axis) * factor));
  out.nodes_per_axis = std::max<std::size_t>(2, nodes + (nodes % 2));
  const double samples = static_cast<double>(spec.sample_count) * factor;
  std::size_t pow2 = spec.replicates;
  while (static_cast<double>(pow2) < samples) pow2 *= 2;
  out.sample_count = pow2;
  out.target_abs_error = spec.target_abs_error / factor;
  return out;
}

double chebyshev_node(std::size_t i, std::size_t n) {
  return std::cos((2.0 * static_cast<double>(i) + 1.0) * kPi / (2.0 * static_cast<double>(n)));
}

QuadratureResult integrate_box(const BoxIntegrand& f, int n, const QuadratureSpec& spec) {
  spec.validate();
  if (n < 1) throw PreconditionError("dimension must be positive");
  if (spec.method == QuadratureMethod::QuasiMonteCarlo) return qmc_average(f, n, spec, to_angle);
  const std::size_t fine = spec.nodes_per_axis;
  const std::size_t coarse = coarse_count(fine);
  QuadratureResult result;
  result.value = tensor_sum(f, n, midpoint_nodes(fine), false);
  const double rough = tensor_sum(f, n, midpoint_nodes(coarse), false);
  result.abs_error_estimate = std::abs(result.value - rough);
  result.evaluations = tensor_count(fine, n, false) + tensor_count(coarse, n, false);
  return result;
}

QuadratureResult integrate_cosine(const CosineIntegrand& f, int d, const QuadratureSpec& spec,
                                  bool symmetric) {
  spec.validate();
  if (d < 1) throw PreconditionError("dimension must be positive");
  if (spec.method == QuadratureMethod::QuasiMonteCarlo) return qmc_average(f, d, spec, to_cosine);
  const std::size_t fine = spec.nodes_per_axis;
  const std::size_t coarse = coarse_count(fine);
  QuadratureResult result;
  result.value = tensor_sum(f, d, chebyshev_nodes(fine), symmetric);
  const double rough = tensor_sum(f, d, chebyshev_nodes(coarse), symmetric);
  result.abs_error_estimate = std::abs(result.value - rough);
  result.evaluations = tensor_count(fine, d, symmetric) + tensor_count(coarse, d, symmetric);
  return result;
}

QuadratureResult integrate_inverse_epsilon(const CosineIntegrand& numerator, double c_sum, int d,
                                           const QuadratureSpec& spec, bool symmetric) {
  auto epsilon = [](std::span<const double> x) {
    double s = 0.0;
    for (double xj : x) s += 1.0 - xj;
    return 2.0 * s;
  };
  if (c_sum <= 0.0) {
    return integrate_cosine([&](std::span<const double> x) { return numerator(x) / epsilon(x); }, d,
                            spec, symmetric);
  }
  if (d <= 2) {
    throw DivergenceError("integral of numerator/ε diverges: numerator at k = 0 is positive and d = " +
                          std::to_string(d) + " <= 2");
  }
  auto result = integrate_cosine(
      [&](std::span<const double> x) { return (numerator(x) - c_sum) / epsilon(x); }, d, spec,
      symmetric);
  result.value += c_sum * watson_integral(d);
  return result;
}

QuadratureResult watson_direct(int d, std::size_t nodes_per_axis) {
  if (d < 3) throw DivergenceError("Watson integral diverges for d <= 2");
  auto partial = [d](std::size_t n) {
    const auto nodes = chebyshev_nodes(n);
    KahanSum sum;
    enumerate_sorted(d, nodes, 0, [&](double w, std::span<const double> x) {
      double s = 0.0;
      for (double xj : x) s += 1.0 - xj;
      if (x[d - 1] == nodes[0]) return;  // corner cell around k = 0
      sum.add(w / (2.0 * s));
    });
    std::vector<double> rest(n, 0.0);
    rest[0] = sum.value();
    parallel_for(n, [&](std::size_t first) {
      if (first == 0) return;
      KahanSum part;
      enumerate_sorted(d, nodes, first, [&](double w, std::span<const double> x) {
        double s = 0.0;
        for (double xj : x) s += 1.0 - xj;
        part.add(w / (2.0 * s));
      });
      rest[first] = part.value();
    });
    return ordered_sum(rest);
  };
  const double coarse = partial(nodes_per_axis);
  const double fine = partial(2 * nodes_per_axis);
  const double ratio = std::pow(2.0, d - 2);
  QuadratureResult result;
  result.value = (ratio * fine - coarse) / (ratio - 1.0);
  result.abs_error_estimate = std::abs(result.value - fine);
  result.evaluations = tensor_count(nodes_per_axis, d, true) + tensor_count(2 * nodes_per_axis, d, true);
  return result;
}

void visit_cosine_nodes(int d, const QuadratureSpec& spec, bool coarse, bool symmetric,
                        const NodeVisitor& visit) {
  spec.validate();
  if (spec.method == QuadratureMethod::QuasiMonteCarlo) {
    const std::size_t per = points_per_replicate(spec);
    const double weight = 1.0 / static_cast<double>(per);
    std::vector<double> x(d);
    for (std::size_t r = 0; r < spec.replicates; ++r) {
      ScrambledSobol gen(d, spec.seed, r);
      ScrambledSobol::Cursor cursor(gen, 0);
      for (std::size_t i = 0; i < per; ++i) {
        const auto u = cursor.current();
        for (int j = 0; j < d; ++j) x[j] = to_cosine(u[j]);
        visit(r, weight, x);
        cursor.advance();
      }
    }
    return;
  }
  const std::size_t n = coarse ? coarse_count(spec.nodes_per_axis) : spec.nodes_per_axis;
  const auto nodes = chebyshev_nodes(n);
  auto body = [&](double w, std::span<const double> x) { visit(0, w, x); };
  for (std::size_t first = 0; first < n; ++first) {
    if (symmetric) {
      enumerate_sorted(d, nodes, first, body);
    } else {
      enumerate_full(d, nodes, first, body);
    }
  }
}

std::size_t cosine_node_count(int d, const QuadratureSpec& spec, bool coarse, bool symmetric) {
  if (spec.method == QuadratureMethod::QuasiMonteCarlo) return points_per_replicate(spec) * spec.replicates;
  const std::size_t n = coarse ? coarse_count(spec.nodes_per_axis) : spec.nodes_per_axis;
  return static_cast<std::size_t>(tensor_count(n, d, symmetric));
}

}  // namespace loopbound
