#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace loopbound {

enum class QuadratureMethod { TensorChebyshev, QuasiMonteCarlo };

std::string to_string(QuadratureMethod method);
QuadratureMethod parse_method(const std::string& name);

struct QuadratureSpec {
  QuadratureMethod method = QuadratureMethod::TensorChebyshev;
  std::size_t nodes_per_axis = 64;          // tensor rule
  std::size_t sample_count = std::size_t{1} << 20;  // QMC, all replicates together
  std::size_t replicates = 16;              // independent QMC scramblings
  std::uint64_t seed = 0x5EEDu;
  double target_abs_error = 5e-4;

  /// Throws PreconditionError on a violated invariant.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::uint64_t evaluations = 0;
};

/// Default rule for a d-dimensional cosine-space integral: tensor
/// Gauss-Chebyshev for d <= 5 (resolution chosen per d), QMC otherwise.
/// `precision` > 1 refines node counts and sample sizes proportionally.
QuadratureSpec default_spec(int d, double precision = 1.0);

/// Same spec with nodes_per_axis and sample_count multiplied by `factor`
/// (nodes rounded to an even count).
QuadratureSpec refined(const QuadratureSpec& spec, double factor);

/// Integrand over momenta k in [0, 2π]^n.
using BoxIntegrand = std::function<double(std::span<const double> k)>;

/// Integrand expressed through x_j = cos(k_j).
using CosineIntegrand = std::function<double(std::span<const double> x)>;

/// Normalized average (2π)^{-n} ∫ f over the box. Tensor: periodic midpoint
/// rule, error from halving the node count. QMC: scrambled Sobol, error from
/// the spread of replicate means. Throws EvaluationError on non-finite f.
QuadratureResult integrate_box(const BoxIntegrand& f, int n, const QuadratureSpec& spec);

/// Same average for an integrand depending on k only through cos(k_j).
/// Tensor: Gauss-Chebyshev nodes in x; when `symmetric` is set the
/// integrand must be invariant under permutations of x and only sorted
/// index tuples are visited.
QuadratureResult integrate_cosine(const CosineIntegrand& f, int d, const QuadratureSpec& spec,
                                  bool symmetric = true);

/// ∫ numerator/ε. `c_sum` is the value of the numerator at k = 0. When it
/// is positive the singular part is split off as c_sum·W_d; this requires
/// d >= 3 (DivergenceError otherwise).
QuadratureResult integrate_inverse_epsilon(const CosineIntegrand& numerator, double c_sum, int d,
                                           const QuadratureSpec& spec, bool symmetric = true);

/// Diagnostic: W_d by direct Gauss-Chebyshev summation of 1/ε with the
/// corner cell around k = 0 removed, Richardson-extrapolated over n, 2n.
QuadratureResult watson_direct(int d, std::size_t nodes_per_axis);

/// Weighted node visitor shared by the integrators and the precomputed
/// tables in rp_integrals. For the tensor rule only replicate 0 exists and
/// `coarse` selects the half-resolution rule used for error estimates. For
/// QMC there are spec.replicates replicates and `coarse` is ignored.
/// Weights within one replicate sum to 1.
using NodeVisitor = std::function<void(std::size_t replicate, double weight, std::span<const double> x)>;
void visit_cosine_nodes(int d, const QuadratureSpec& spec, bool coarse, bool symmetric,
                        const NodeVisitor& visit);

/// Number of nodes visit_cosine_nodes will produce (all replicates).
std::size_t cosine_node_count(int d, const QuadratureSpec& spec, bool coarse, bool symmetric);

/// Gauss-Chebyshev node x_i = cos((2i+1)π/(2n)), i = 0..n-1.
double chebyshev_node(std::size_t i, std::size_t n);

}  // namespace loopbound
