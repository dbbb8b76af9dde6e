#include "loopbound/loop_mc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "loopbound/errors.hpp"
#include "loopbound/parallel.hpp"

namespace loopbound {
namespace {

void check_simulation_params(const ModelParams& params) {
  params.validate_for_simulation();
}

double mean_of(const std::vector<double>& v) {
  return ordered_sum(v) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  KahanSum ss;
  for (double x : v) ss.add((x - m) * (x - m));
  return std::sqrt(ss.value() / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Fills mean/error of `out` from out.batches, treating rows as independent.
void summarize_batches(KappaEstimates& out) {
  const std::size_t n = out.batches.front().size();
  out.mean.assign(n, 0.0);
  out.error.assign(n, 0.0);
  std::vector<double> column(out.batches.size());
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t b = 0; b < out.batches.size(); ++b) column[b] = out.batches[b][x];
    out.mean[x] = mean_of(column);
    out.error[x] = standard_error(column);
  }
  std::vector<double> density(out.batches.size());
  for (std::size_t b = 0; b < out.batches.size(); ++b) density[b] = mean_of(out.batches[b]);
  out.loop_density = mean_of(density);
  out.loop_density_error = standard_error(density);
}

}  // namespace

LinkConfiguration sample_poisson(const TorusLattice& lattice, double beta, double u, Philox4x32& rng) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("u must lie in [0, 1]");
  LinkConfiguration config(lattice, beta);
  for (std::size_t e = 0; e < lattice.edge_count(); ++e) {
    double t = 0.0;
    while (true) {
      t -= std::log(rng.uniform());
      if (t >= beta) break;
      const LinkKind kind = rng.uniform() < u ? LinkKind::Cross : LinkKind::DoubleBar;
      // A tie has probability zero; the colliding point is simply dropped.
      config.insert(Link{e, t, kind});
    }
  }
  return config;
}

LinkConfiguration sample_poisson(const TorusLattice& lattice, double beta, double u, std::uint64_t seed) {
  Philox4x32 rng(seed, 0);
  return sample_poisson(lattice, beta, u, rng);
}

double birth_acceptance(std::size_t edges, double beta, std::size_t M, int theta, int delta) {
  const double ratio = static_cast<double>(edges) * beta / static_cast<double>(M + 1) * std::pow(theta, delta);
  return std::min(1.0, ratio);
}

double death_acceptance(std::size_t edges, double beta, std::size_t M, int theta, int delta) {
  const double ratio = static_cast<double>(M) / (static_cast<double>(edges) * beta) * std::pow(theta, delta);
  return std::min(1.0, ratio);
}

std::vector<double> same_loop_profile(const TorusLattice& lattice, const std::vector<std::size_t>& loop_ids) {
  const std::size_t n = lattice.vertex_count();
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t hits = 0;
    for (std::size_t y = 0; y < n; ++y) hits += loop_ids[y] == loop_ids[lattice.translate(y, x)];
    out[x] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return out;
}

KappaEstimates mcmc_run(const TorusLattice& lattice, const ModelParams& params, const McmcOptions& options) {
  check_simulation_params(params);
  if (options.batches < 2) throw PreconditionError("need at least two batches");
  const std::size_t edges = lattice.edge_count();
  const double beta = params.beta;
  const double expected = static_cast<double>(edges) * beta;
  const std::uint64_t equilibration =
      options.equilibration ? options.equilibration : static_cast<std::uint64_t>(std::ceil(10.0 * expected));
  const std::uint64_t every =
      options.measure_every ? options.measure_every : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(expected));
  const std::uint64_t measurements = options.steps / every;
  if (measurements < options.batches) {
    throw PreconditionError("too few steps: need at least one measurement per batch");
  }

  Philox4x32 rng(options.seed, 0);
  LinkConfiguration config(lattice, beta);
  std::uint64_t accepted = 0;
  auto propose = [&]() {
    const std::size_t M = config.link_count();
    if (rng.uniform() < 0.5) {
      const Link link{static_cast<std::size_t>(rng.below(edges)), rng.uniform() * beta,
                      rng.uniform() < params.u ? LinkKind::Cross : LinkKind::DoubleBar};
      const auto& lat = config.lattice();
      if (config.vertex_has_time(lat.edge_tail(link.edge), link.time) ||
          config.vertex_has_time(lat.edge_head(link.edge), link.time)) {
        return;
      }
      const int delta = params.theta == 1 ? 0 : delta_loops_on_insert(config, link);
      if (rng.uniform() < birth_acceptance(edges, beta, M, params.theta, delta)) {
        config.insert(link);
        ++accepted;
      }
    } else {
      if (M == 0) return;
      const std::size_t slot = static_cast<std::size_t>(rng.below(M));
      const Link link = config.link_at(slot);
      const int delta =
          params.theta == 1 ? 0 : -delta_loops_on_insert(config, link, std::pair{link.edge, link.time});
      if (rng.uniform() < death_acceptance(edges, beta, M, params.theta, delta)) {
        config.remove_at(slot);
        ++accepted;
      }
    }
  };

  for (std::uint64_t i = 0; i < equilibration; ++i) propose();
  accepted = 0;

  const std::size_t n = lattice.vertex_count();
  KappaEstimates out;
  out.batches.assign(options.batches, std::vector<double>(n, 0.0));
  std::vector<double> links_per_batch(options.batches, 0.0);
  std::vector<std::size_t> batch_size(options.batches, 0);
  for (std::uint64_t m = 0; m < measurements; ++m) {
    for (std::uint64_t i = 0; i < every; ++i) propose();
    const std::size_t b = static_cast<std::size_t>(m * options.batches / measurements);
    const auto profile = same_loop_profile(lattice, trace_loops(config).loops_at_zero());
    for (std::size_t x = 0; x < n; ++x) out.batches[b][x] += profile[x];
    links_per_batch[b] += static_cast<double>(config.link_count());
    ++batch_size[b];
  }
  for (std::size_t b = 0; b < options.batches; ++b) {
    for (double& v : out.batches[b]) v /= static_cast<double>(batch_size[b]);
    links_per_batch[b] /= static_cast<double>(batch_size[b]);
  }
  summarize_batches(out);
  out.mean_links = mean_of(links_per_batch);
  out.mean_links_error = standard_error(links_per_batch);
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(measurements * every);
  out.measurements = measurements;
  out.effective_sample_size = static_cast<double>(measurements);
  return out;
}

KappaEstimates importance_oracle(const TorusLattice& lattice, const ModelParams& params, std::size_t samples,
                                 std::uint64_t seed, std::size_t blocks) {
  check_simulation_params(params);
  if (blocks < 2 || samples < blocks) throw PreconditionError("need at least one sample per jackknife block");
  const std::size_t n = lattice.vertex_count();
  std::vector<double> log_weight(samples);
  std::vector<std::vector<double>> profiles(samples);
  std::vector<double> link_counts(samples);
  parallel_for(samples, [&](std::size_t i) {
    Philox4x32 rng(seed, i);
    const auto config = sample_poisson(lattice, params.beta, params.u, rng);
    const auto loops = trace_loops(config);
    log_weight[i] = static_cast<double>(loops.loop_count()) * std::log(static_cast<double>(params.theta));
    profiles[i] = same_loop_profile(lattice, loops.loops_at_zero());
    link_counts[i] = static_cast<double>(config.link_count());
  });
  const double top = *std::max_element(log_weight.begin(), log_weight.end());
  std::vector<double> w(samples);
  for (std::size_t i = 0; i < samples; ++i) w[i] = std::exp(log_weight[i] - top);

  // Per-block weighted sums, then delete-one-block pseudo-values.
  std::vector<std::vector<double>> block_wk(blocks, std::vector<double>(n + 1, 0.0));
  std::vector<double> block_w(blocks, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t b = i * blocks / samples;
    block_w[b] += w[i];
    for (std::size_t x = 0; x < n; ++x) block_wk[b][x] += w[i] * profiles[i][x];
    block_wk[b][n] += w[i] * link_counts[i];
  }
  std::vector<double> total_wk(n + 1, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t x = 0; x <= n; ++x) total_wk[x] += block_wk[b][x];
  }
  const double total_w = ordered_sum(block_w);
  KappaEstimates out;
  out.batches.assign(blocks, std::vector<double>(n, 0.0));
  std::vector<double> links_pseudo(blocks);
  const double B = static_cast<double>(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double rest_w = total_w - block_w[b];
    for (std::size_t x = 0; x <= n; ++x) {
      const double full = total_wk[x] / total_w;
      const double rest = (total_wk[x] - block_wk[b][x]) / rest_w;
      const double pseudo = B * full - (B - 1.0) * rest;
      if (x < n) {
        out.batches[b][x] = pseudo;
      } else {
        links_pseudo[b] = pseudo;
      }
    }
  }
  summarize_batches(out);
  // The jackknife mean of pseudo-values carries an O(1/n) bias correction;
  // report the plain ratio estimate as the value.
  for (std::size_t x = 0; x < n; ++x) out.mean[x] = total_wk[x] / total_w;
  out.mean_links = total_wk[n] / total_w;
  out.mean_links_error = standard_error(links_pseudo);
  KahanSum w2;
  for (double wi : w) w2.add(wi * wi);
  out.effective_sample_size = total_w * total_w / w2.value();
  out.unreliable = out.effective_sample_size < 100.0;
  out.measurements = samples;
  out.acceptance_rate = 1.0;
  return out;
}

FourierEstimate estimate_fourier(const KappaEstimates& kappa, const TorusLattice& lattice) {
  const std::size_t n = lattice.vertex_count();
  if (kappa.mean.size() != n) throw PreconditionError("kappa estimates do not cover the torus");
  const int L = lattice.L();
  const int d = lattice.d();
  std::vector<std::vector<int>> coords(n);
  for (std::size_t x = 0; x < n; ++x) coords[x] = lattice.coordinates(x);
  FourierEstimate out;
  auto transform = [&](const std::vector<int>& label, const std::vector<double>& values) {
    KahanSum sum;
    for (std::size_t x = 0; x < n; ++x) {
      double phase = 0.0;
      for (int j = 0; j < d; ++j) phase += label[j] * coords[x][j];
      sum.add(std::cos(2.0 * std::numbers::pi * phase / L) * values[x]);
    }
    return sum.value();
  };
  for (std::size_t q = 0; q < n; ++q) {
    // Map coordinates 0..L-1 to labels in (-L/2, L/2].
    std::vector<int> label = lattice.coordinates(q);
    for (int& c : label) {
      if (2 * c > L) c -= L;
    }
    const double value = transform(label, kappa.mean);
    double error = 0.0;
    if (kappa.batches.size() >= 2) {
      std::vector<double> per_batch(kappa.batches.size());
      for (std::size_t b = 0; b < kappa.batches.size(); ++b) per_batch[b] = transform(label, kappa.batches[b]);
      error = standard_error(per_batch);
    } else {
      KahanSum var;
      for (std::size_t x = 0; x < n; ++x) {
        double phase = 0.0;
        for (int j = 0; j < d; ++j) phase += label[j] * coords[x][j];
        const double c = std::cos(2.0 * std::numbers::pi * phase / L);
        var.add(c * c * kappa.error[x] * kappa.error[x]);
      }
      error = std::sqrt(var.value());
    }
    out.momenta.push_back(std::move(label));
    out.value.push_back(value);
    out.error.push_back(error);
  }
  out.min_index = static_cast<std::size_t>(std::min_element(out.value.begin(), out.value.end()) - out.value.begin());
  out.worst_margin = out.value[0] + 3.0 * out.error[0];
  for (std::size_t q = 0; q < n; ++q) out.worst_margin = std::min(out.worst_margin, out.value[q] + 3.0 * out.error[q]);
  return out;
}

}  // namespace loopbound
