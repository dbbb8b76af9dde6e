#include <doctest.h>

#include <cmath>
#include <vector>

#include "loopbound/errors.hpp"
#include "loopbound/lattice.hpp"
#include "loopbound/loop_mc.hpp"

using namespace loopbound;

namespace {

ModelParams sim(int d, int theta, double u, double beta) {
  ModelParams p;
  p.d = d;
  p.theta = theta;
  p.u = u;
  p.beta = beta;
  return p;
}

std::size_t loops(const LinkConfiguration& c) { return trace_loops(c).loop_count(); }

}  // namespace

TEST_CASE("torus geometry") {
  for (int d = 1; d <= 3; ++d) {
    const TorusLattice lat(d, 4);
    CHECK(lat.vertex_count() == static_cast<std::size_t>(std::pow(4, d)));
    CHECK(lat.edge_count() == lat.vertex_count() * static_cast<std::size_t>(d));
    std::vector<std::size_t> inc;
    for (std::size_t v = 0; v < lat.vertex_count(); ++v) {
      lat.incident_edges(v, inc);
      CHECK(inc.size() == static_cast<std::size_t>(2 * d));
      CHECK(lat.vertex(lat.coordinates(v)) == v);
    }
  }
  const TorusLattice lat(2, 3);
  CHECK(lat.shift(0, 0, -1) == lat.vertex(std::vector<int>{2, 0}));
  CHECK_THROWS_AS(TorusLattice(2, 2), PreconditionError);
}

TEST_CASE("link configuration bookkeeping") {
  const TorusLattice lat(1, 4);
  LinkConfiguration c(lat, 1.0);
  CHECK(c.insert({0, 0.5, LinkKind::Cross}));
  CHECK(c.insert({0, 0.2, LinkKind::DoubleBar}));
  CHECK(c.insert({2, 0.7, LinkKind::Cross}));
  // Edge 1 shares vertex 1 with edge 0: a tie at 0.5 is rejected.
  CHECK_FALSE(c.insert({1, 0.5, LinkKind::Cross}));
  CHECK(c.link_count() == 3);
  CHECK(c.edge_links(0).size() == 2);
  CHECK(c.edge_links(0)[0].time < c.edge_links(0)[1].time);
  CHECK(c.contains(0, 0.2));
  CHECK(c.erase(0, 0.2));
  CHECK_FALSE(c.erase(0, 0.2));
  CHECK(c.link_count() == 2);
  const Link removed = c.remove_at(0);
  CHECK(c.link_count() == 1);
  CHECK_FALSE(c.contains(removed.edge, removed.time));
  for (std::size_t s = 0; s < c.link_count(); ++s) CHECK(c.contains(c.link_at(s).edge, c.link_at(s).time));
  CHECK_THROWS_AS(c.insert({0, 1.5, LinkKind::Cross}), PreconditionError);
}

TEST_CASE("tracing small configurations") {
  const TorusLattice lat(2, 3);
  LinkConfiguration c(lat, 1.0);
  CHECK(loops(c) == 9);
  c.insert({4, 0.3, LinkKind::Cross});
  CHECK(loops(c) == 8);
  c.insert({4, 0.6, LinkKind::Cross});
  CHECK(loops(c) == 9);

  LinkConfiguration b(lat, 1.0);
  b.insert({4, 0.3, LinkKind::DoubleBar});
  CHECK(loops(b) == 8);
  b.insert({4, 0.6, LinkKind::DoubleBar});
  CHECK(loops(b) == 9);

  // Membership: both endpoints at t = 0 lie on the merged loop.
  LinkConfiguration one(lat, 1.0);
  one.insert({0, 0.5, LinkKind::Cross});
  const auto dec = trace_loops(one);
  const std::size_t head = lat.edge_head(0);
  CHECK(dec.loop_of(0, 0.0) == dec.loop_of(head, 0.0));
  CHECK(dec.loop_of(0, 0.9) == dec.loop_of(head, 0.1));
  CHECK(dec.loop_of(0, 0.0) != dec.loop_of(lat.vertex(std::vector<int>{2, 2}), 0.0));
}

TEST_CASE("toggles match full retrace") {
  const TorusLattice lat(2, 4);
  for (double u : {0.0, 0.5, 1.0}) {
    Philox4x32 rng(77, static_cast<std::uint64_t>(u * 10));
    auto config = sample_poisson(lat, 1.5, u, rng);
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 1000; ++i) {
      const std::size_t before = loops(config);
      Link link;
      const bool remove = config.link_count() > 0 && rng.uniform() < 0.5;
      if (remove) {
        link = config.link_at(static_cast<std::size_t>(rng.below(config.link_count())));
      } else {
        link = {static_cast<std::size_t>(rng.below(lat.edge_count())), rng.uniform() * 1.5,
                rng.uniform() < u ? LinkKind::Cross : LinkKind::DoubleBar};
      }
      const int delta = delta_loops_on_toggle(config, link);
      if (remove) {
        config.erase(link.edge, link.time);
      } else if (!config.insert(link)) {
        continue;
      }
      const int actual = static_cast<int>(loops(config)) - static_cast<int>(before);
      REQUIRE(delta == actual);
      REQUIRE(std::abs(delta) <= 1);
      ++counts[delta + 1];
    }
    CAPTURE(u);
    if (u == 0.0 || u == 1.0) CHECK(counts[1] == 0);
    CHECK(counts[0] > 0);
    CHECK(counts[2] > 0);
  }
}

TEST_CASE("first insertion merges, deletion splits") {
  const TorusLattice lat(3, 3);
  LinkConfiguration c(lat, 2.0);
  const Link link{5, 1.0, LinkKind::Cross};
  CHECK(delta_loops_on_toggle(c, link) == -1);
  c.insert(link);
  CHECK(delta_loops_on_toggle(c, link) == 1);
}

TEST_CASE("poisson sampling") {
  const TorusLattice lat(3, 4);
  Philox4x32 rng(5);
  double sum = 0.0;
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) sum += static_cast<double>(sample_poisson(lat, 1.0, 0.5, rng).link_count());
  const double mean = sum / kSamples;
  CHECK(std::abs(mean - 192.0) <= 3.0 * std::sqrt(192.0 / kSamples));

  const auto dbar = sample_poisson(lat, 3.0, 0.0, 9);
  for (const auto& l : dbar.links()) CHECK(l.kind == LinkKind::DoubleBar);
  int empty = 0;
  for (int i = 0; i < 200; ++i) empty += sample_poisson(lat, 1e-6, 0.5, rng).link_count() == 0;
  CHECK(empty >= 195);
  CHECK_THROWS_AS(sample_poisson(lat, 1.0, 1.5, 1), DomainError);
}

TEST_CASE("detailed balance on a frozen two-link state space") {
  const TorusLattice lat(1, 3);
  const double beta = 1.0;
  const std::size_t E = lat.edge_count();
  const Link links[2] = {{0, 0.25, LinkKind::Cross}, {1, 0.6, LinkKind::DoubleBar}};
  for (int theta : {1, 2, 3}) {
    for (double u : {0.3, 0.7}) {
      // Density of a state: θ^{|𝓛|} times the mark probabilities.
      auto state = [&](int mask) {
        LinkConfiguration c(lat, beta);
        for (int i = 0; i < 2; ++i) {
          if (mask & (1 << i)) c.insert(links[i]);
        }
        return c;
      };
      auto mark = [&](const Link& l) { return l.kind == LinkKind::Cross ? u : 1.0 - u; };
      auto weight = [&](int mask) {
        double w = std::pow(theta, static_cast<double>(loops(state(mask))));
        for (int i = 0; i < 2; ++i) {
          if (mask & (1 << i)) w *= mark(links[i]);
        }
        return w;
      };
      for (int mask = 0; mask < 4; ++mask) {
        for (int i = 0; i < 2; ++i) {
          if (mask & (1 << i)) continue;
          const int up = mask | (1 << i);
          const auto from = state(mask);
          const std::size_t M = from.link_count();
          const int delta = delta_loops_on_toggle(from, links[i]);
          // Birth: choose birth (1/2), uniform position (1/(Eβ)), kind (mark).
          const double forward =
              weight(mask) * 0.5 / (static_cast<double>(E) * beta) * mark(links[i]) *
              birth_acceptance(E, beta, M, theta, delta);
          // Death: choose death (1/2), uniform link among M + 1.
          const double backward =
              weight(up) * 0.5 / static_cast<double>(M + 1) * death_acceptance(E, beta, M + 1, theta, -delta);
          CHECK(std::abs(forward - backward) <= 1e-12 * std::max(forward, backward));
        }
      }
    }
  }
}

TEST_CASE("mcmc basic properties") {
  const TorusLattice lat(2, 4);
  McmcOptions o;
  o.steps = 40000;
  o.seed = 3;
  const auto k = mcmc_run(lat, sim(2, 2, 0.5, 1.0), o);
  CHECK(k.mean[0] == 1.0);
  CHECK(k.error[0] == 0.0);
  for (std::size_t x = 0; x < lat.vertex_count(); ++x) {
    const std::size_t minus = lat.vertex([&] {
      auto c = lat.coordinates(x);
      for (auto& v : c) v = (4 - v) % 4;
      return c;
    }());
    CHECK(std::abs(k.mean[x] - k.mean[minus]) <= 3.0 * std::hypot(k.error[x], k.error[minus]) + 1e-12);
    CHECK(k.mean[x] >= 0.0);
    CHECK(k.mean[x] <= 1.0);
  }
  const auto again = mcmc_run(lat, sim(2, 2, 0.5, 1.0), o);
  CHECK(again.mean == k.mean);
  CHECK_THROWS_AS(mcmc_run(lat, sim(2, 0, 0.5, 1.0), o), DomainError);
}

TEST_CASE("theta = 1 chain samples the Poisson measure") {
  const TorusLattice lat(2, 4);
  McmcOptions o;
  o.steps = 200000;
  o.seed = 11;
  const auto chain = mcmc_run(lat, sim(2, 1, 0.5, 1.0), o);
  const auto direct = importance_oracle(lat, sim(2, 1, 0.5, 1.0), 20000, 12);
  CHECK(direct.effective_sample_size == doctest::Approx(20000.0));
  for (std::size_t x : {1u, 4u, 5u, 10u}) {
    CAPTURE(x);
    CHECK(std::abs(chain.mean[x] - direct.mean[x]) <= 3.0 * std::hypot(chain.error[x], direct.error[x]));
  }
  CHECK(std::abs(chain.mean_links - 32.0) <= 3.0 * chain.mean_links_error + 0.5);
}

TEST_CASE("mcmc agrees with the importance oracle on a small chain") {
  const TorusLattice lat(1, 4);
  const auto p = sim(1, 2, 0.5, 0.5);
  McmcOptions o;
  o.steps = 400000;
  o.seed = 21;
  const auto chain = mcmc_run(lat, p, o);
  const auto oracle = importance_oracle(lat, p, 40000, 22);
  CHECK_FALSE(oracle.unreliable);
  for (std::size_t x = 1; x < 4; ++x) {
    CAPTURE(x);
    CHECK(std::abs(chain.mean[x] - oracle.mean[x]) <= 3.0 * std::hypot(chain.error[x], oracle.error[x]));
  }
}

TEST_CASE("importance oracle flags low effective sample size") {
  const TorusLattice lat(2, 6);
  const auto r = importance_oracle(lat, sim(2, 3, 0.0, 2.0), 200, 4);
  CHECK(r.unreliable);
  CHECK(r.effective_sample_size < 100.0);
}

TEST_CASE("small beta disconnects distinct points") {
  const TorusLattice lat(2, 4);
  const auto r = importance_oracle(lat, sim(2, 2, 0.5, 1e-6), 256, 1);
  CHECK(r.mean[0] == 1.0);
  for (std::size_t x = 1; x < lat.vertex_count(); ++x) CHECK(r.mean[x] == 0.0);
}

TEST_CASE("fourier transform of simple profiles") {
  const TorusLattice lat(2, 4);
  KappaEstimates delta;
  delta.mean.assign(lat.vertex_count(), 0.0);
  delta.mean[0] = 1.0;
  delta.error.assign(lat.vertex_count(), 0.0);
  const auto f = estimate_fourier(delta, lat);
  REQUIRE(f.value.size() == lat.vertex_count());
  for (double v : f.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  KappaEstimates flat = delta;
  flat.mean.assign(lat.vertex_count(), 0.3);
  const auto g = estimate_fourier(flat, lat);
  for (std::size_t q = 0; q < g.value.size(); ++q) {
    const bool origin = g.momenta[q] == std::vector<int>{0, 0};
    CHECK(g.value[q] == doctest::Approx(origin ? 0.3 * 16 : 0.0).epsilon(1e-12));
    for (int n : g.momenta[q]) {
      CHECK(n > -2);
      CHECK(n <= 2);
    }
  }
}

TEST_CASE("fourier positivity at theta = 2, u = 0") {
  const TorusLattice lat(2, 6);
  McmcOptions o;
  o.steps = 150000;
  o.seed = 8;
  const auto k = mcmc_run(lat, sim(2, 2, 0.0, 1.0), o);
  const auto f = estimate_fourier(k, lat);
  CHECK(f.worst_margin >= 0.0);
  CHECK(f.value[f.min_index] >= -3.0 * f.error[f.min_index]);
}
