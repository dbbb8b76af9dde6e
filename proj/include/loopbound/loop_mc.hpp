#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "loopbound/lattice.hpp"
#include "loopbound/rng.hpp"
#include "loopbound/rp_integrals.hpp"

namespace loopbound {

/// Independent Poisson processes of rate 1 on every edge × [0, β); each
/// link is a cross with probability u, a double bar otherwise.
LinkConfiguration sample_poisson(const TorusLattice& lattice, double beta, double u, std::uint64_t seed);
LinkConfiguration sample_poisson(const TorusLattice& lattice, double beta, double u, Philox4x32& rng);

/// (1/|Λ|) ∑_y 1[y and y + x on the same loop] for every x, from the loop
/// ids at time 0.
std::vector<double> same_loop_profile(const TorusLattice& lattice, const std::vector<std::size_t>& loop_ids);

/// Metropolis acceptance for adding a link to a configuration with M links
/// (birth) or removing one from a configuration with M links (death);
/// `delta` is the change in the loop count caused by the move.
double birth_acceptance(std::size_t edges, double beta, std::size_t M, int theta, int delta);
double death_acceptance(std::size_t edges, double beta, std::size_t M, int theta, int delta);

/// Connection probabilities κ(x, 0) for every x on the torus, with
/// per-batch values kept for error propagation.
struct KappaEstimates {
  std::vector<double> mean;
  std::vector<double> error;
  std::vector<std::vector<double>> batches;  // batch × vertex
  double loop_density = 0.0;
  double loop_density_error = 0.0;
  double mean_links = 0.0;
  double mean_links_error = 0.0;
  double acceptance_rate = 0.0;
  std::uint64_t measurements = 0;
  double effective_sample_size = 0.0;
  bool unreliable = false;
};

struct McmcOptions {
  std::uint64_t steps = 200000;       // proposals after equilibration
  std::uint64_t seed = 1;
  std::uint64_t equilibration = 0;    // 0: 10·|E|·β proposals
  std::uint64_t measure_every = 0;    // 0: max(1, |E|·β) proposals
  std::size_t batches = 32;
};

/// Birth-death Metropolis chain for the measure ∝ θ^{|𝓛|} ρ.
KappaEstimates mcmc_run(const TorusLattice& lattice, const ModelParams& params, const McmcOptions& options);

/// Direct Poisson samples reweighted by θ^{|𝓛|}; block-jackknife errors.
/// Flags the result unreliable when the effective sample size is below 100.
KappaEstimates importance_oracle(const TorusLattice& lattice, const ModelParams& params, std::size_t samples,
                                 std::uint64_t seed, std::size_t blocks = 32);

struct FourierEstimate {
  std::vector<std::vector<int>> momenta;  // integer labels n, k = 2πn/L
  std::vector<double> value;
  std::vector<double> error;
  std::size_t min_index = 0;  // argmin of value
  /// min over k of (value + 3 error); nonnegative means no violation at 3σ.
  double worst_margin = 0.0;
};

/// κ̂(k, 0) = ∑_x e^{-ik·x} κ(x, 0) on the dual torus. Errors come from the
/// batch values when present.
FourierEstimate estimate_fourier(const KappaEstimates& kappa, const TorusLattice& lattice);

}  // namespace loopbound
