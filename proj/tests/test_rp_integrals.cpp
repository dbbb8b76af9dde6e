#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "loopbound/errors.hpp"
#include "loopbound/rng.hpp"
#include "loopbound/rp_integrals.hpp"
#include "loopbound/special.hpp"

using namespace loopbound;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

QuadratureSpec tensor(std::size_t n) {
  QuadratureSpec s;
  s.nodes_per_axis = n;
  return s;
}

QuadratureSpec qmc(std::size_t samples) {
  QuadratureSpec s;
  s.method = QuadratureMethod::QuasiMonteCarlo;
  s.sample_count = samples;
  return s;
}

CoefficientVector cross() { return CoefficientVector({1.0, -1.0}); }

// c(N) = (a, b, 0, ..., 0, tail) of length N + 1.
CoefficientVector finite_n(double a, double b, double tail, int N) {
  std::vector<double> c(static_cast<std::size_t>(N) + 1, 0.0);
  c[0] = a;
  c[1] = b;
  c[static_cast<std::size_t>(N)] = tail;
  return CoefficientVector(c);
}

}  // namespace

TEST_CASE("coefficient parsing") {
  const auto c = CoefficientVector::parse("1,-0.5,0");
  CHECK(c.head() == std::vector<double>{1.0, -0.5, 0.0});
  CHECK_FALSE(c.has_tail());
  CHECK(c.degree() == 2);
  const auto t = CoefficientVector::parse("0.5,0.5;-1");
  REQUIRE(t.has_tail());
  CHECK(*t.tail() == -1.0);
  CHECK(t.sum() == 0.0);
  CHECK(t.head_sum() == 1.0);
  CHECK_THROWS_AS(CoefficientVector::parse(""), PreconditionError);
  CHECK_THROWS_AS(CoefficientVector::parse("1,x"), PreconditionError);
}

TEST_CASE("model parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate_for_bounds());
  p.theta = 1;
  CHECK_THROWS_AS(p.validate_for_bounds(), DomainError);
  CHECK_THROWS_AS(p.validate_for_simulation(), DomainError);  // β = ∞
  p.beta = 2.0;
  CHECK_NOTHROW(p.validate_for_simulation());
  p.theta = 2;
  p.u = 0.75;
  CHECK_THROWS_AS(p.validate_for_bounds(), DomainError);
  p.u = 0.0;
  p.theta = 0;
  p.beta = 1.0;
  CHECK_THROWS_AS(p.validate_for_simulation(), DomainError);
}

TEST_CASE("dispersion relation") {
  std::vector<double> k(3, 0.0);
  CHECK(epsilon(k) == 0.0);
  CHECK(epsilon_shifted(k) == doctest::Approx(12.0));
  std::fill(k.begin(), k.end(), std::numbers::pi);
  CHECK(epsilon(k) == doctest::Approx(12.0));
  Philox4x32 rng(3);
  for (int d = 1; d <= 9; ++d) {
    std::vector<double> q(static_cast<std::size_t>(d));
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      for (auto& v : q) v = 2.0 * std::numbers::pi * rng.uniform();
      worst = std::max(worst, std::abs(epsilon(q) + epsilon_shifted(q) - 4.0 * d));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("cosine sums") {
  std::vector<double> k = {0.3, 1.1};
  CHECK(cosine_sum(CoefficientVector({1.0, 0.0}), k) == doctest::Approx(1.0));
  std::vector<double> zero = {0.0, 0.0};
  CHECK(cosine_sum(cross(), zero) == 0.0);
  std::vector<double> pi = {std::numbers::pi};
  CHECK(cosine_sum(CoefficientVector({0.0, 1.0}), pi) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine_sum(CoefficientVector({1.0}, -1.0), k), PreconditionError);
  // k-space and x-space forms agree.
  const CoefficientVector c({0.2, -0.7, 0.4, 0.1});
  std::vector<double> x = {std::cos(k[0]), std::cos(k[1])};
  CHECK(cosine_sum_x(c, x) == doctest::Approx(cosine_sum(c, k)).epsilon(1e-13));
}

TEST_CASE("curly I examples") {
  const auto one_d = ical(cross(), 0.0, 1, 0.0, tensor(1 << 14));
  CHECK(one_d.value == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-7));
  for (int d = 1; d <= 5; ++d) {
    const auto r = ical(cross(), 0.5, d, 1.0, default_spec(d));
    CAPTURE(d);
    CHECK(std::abs(r.value - kInvSqrt2) < 1e-9);
  }
  CHECK(ical(CoefficientVector({0.0}), 0.3, 3, 0.4, tensor(16)).value == 0.0);
  CHECK_THROWS_AS(ical(CoefficientVector({1.0}, -1.0), 0.0, 3, 0.0, tensor(16)), PreconditionError);
}

TEST_CASE("sup over alpha: u = 0 gives J") {
  const auto spec = default_spec(3);
  const auto sup = sup_alpha_I(cross(), 0.0, 3, spec);
  const auto j = J(cross(), 3, spec);
  CHECK(sup.route == AlphaRoute::UZero);
  CHECK(sup.argmax == 0.0);
  CHECK(std::abs(sup.value - j.value) < 1e-9);
  CHECK(sup.value == doctest::Approx(0.902842).epsilon(1e-5));
}

TEST_CASE("sup over alpha: cross pair at u = 1/2") {
  const auto sup = sup_alpha_I(cross(), 0.5, 5, default_spec(5));
  CHECK(sup.route == AlphaRoute::CrossHalf);
  CHECK(sup.value == doctest::Approx(kInvSqrt2).epsilon(1e-12));
  CHECK(sup.argmax == 1.0);
}

TEST_CASE("sup over alpha: general c against a dense alpha grid") {
  const CoefficientVector c({0.5, 0.5, 0.0, -1.0});
  const auto spec = tensor(48);
  const auto sup = sup_alpha_I(c, 0.25, 3, spec);
  double best = -1.0;
  double best_alpha = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double alpha = i / 1000.0;
    const double v = ical(c, 0.25, 3, alpha, spec).value;
    if (v > best) {
      best = v;
      best_alpha = alpha;
    }
  }
  CHECK(sup.route != AlphaRoute::EvenSupport);
  CHECK(std::abs(sup.value - best) < 1e-6);
  CHECK(sup.value >= best - 1e-12);
  CHECK(std::abs(sup.argmax - best_alpha) < 2e-3);
}

TEST_CASE("shortcut routes agree with golden section") {
  struct Case {
    CoefficientVector c;
    double u;
    int d;
    AlphaRoute route;
  };
  const std::vector<Case> cases = {
      {cross(), 0.0, 3, AlphaRoute::UZero},
      {CoefficientVector({0.5, 0.5}), 0.0, 2, AlphaRoute::UZero},
      {CoefficientVector({0.5, 0.5, -1.0}), 0.25, 3, AlphaRoute::EvenSupport},
      {CoefficientVector({0.0, 1.0, -1.0}), 0.4, 3, AlphaRoute::EvenSupport},
      {cross(), 0.5, 3, AlphaRoute::CrossHalf},
      {cross(), 0.5, 4, AlphaRoute::CrossHalf},
  };
  for (const auto& k : cases) {
    const auto spec = default_spec(k.d);
    const auto shortcut = sup_alpha_I(k.c, k.u, k.d, spec);
    const auto golden = sup_alpha_I_golden(k.c, k.u, k.d, spec);
    CAPTURE(k.c.to_string());
    CAPTURE(k.u);
    CHECK(shortcut.route == k.route);
    CHECK(std::abs(shortcut.value - golden.value) <= 3.0 * (shortcut.error + golden.error) + 1e-6);
  }
}

TEST_CASE("midpoint concavity of curly I") {
  Philox4x32 rng(2024);
  const double alphas[][2] = {{0.0, 0.5}, {0.5, 1.0}, {0.0, 1.0}, {0.25, 0.75}};
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(2));
    const auto spec = tensor(d == 2 ? 128 : 24);
    std::vector<double> head(2 + rng.below(3));
    for (auto& v : head) v = 2.0 * rng.uniform() - 1.0;
    const CoefficientVector c(head);
    const double u = 0.5 * rng.uniform();
    const AlphaProfile profile(c, d, spec);
    for (const auto& pair : alphas) {
      const auto a = profile.value(u, pair[0]);
      const auto b = profile.value(u, pair[1]);
      const auto mid = profile.value(u, 0.5 * (pair[0] + pair[1]));
      const double tol = 3.0 * (a.abs_error_estimate + b.abs_error_estimate + mid.abs_error_estimate) + 1e-12;
      CAPTURE(c.to_string());
      CHECK(mid.value >= 0.5 * (a.value + b.value) - tol);
    }
    // Independent check through ical at one pair.
    const auto a = ical(c, u, d, 0.0, spec);
    const auto b = ical(c, u, d, 1.0, spec);
    const auto mid = ical(c, u, d, 0.5, spec);
    CHECK(mid.value >= 0.5 * (a.value + b.value) - 1e-12);
  }
}

TEST_CASE("curly I is nonincreasing in alpha at u = 0") {
  const CoefficientVector c({0.3, 0.9, -0.4});
  const auto spec = tensor(32);
  double prev = ical(c, 0.0, 3, 0.0, spec).value;
  for (int i = 1; i <= 10; ++i) {
    const double v = ical(c, 0.0, 3, i / 10.0, spec).value;
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("derivative matches finite differences") {
  const CoefficientVector c({0.2, 0.8, 0.0, -1.0});
  const auto spec = tensor(32);
  const double h = 1e-5;
  for (double alpha : {0.2, 0.5, 0.8}) {
    const double fd = (ical(c, 0.3, 3, alpha + h, spec).value - ical(c, 0.3, 3, alpha - h, spec).value) / (2 * h);
    CHECK(ical_derivative(c, 0.3, 3, alpha, spec).value == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("J examples") {
  CHECK(J(cross(), 1, default_spec(1)).value == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-7));
  CHECK(J(CoefficientVector({0.0}), 3, tensor(16)).value == 0.0);
  CHECK(J(CoefficientVector({0.0}), 2, tensor(16)).value == 0.0);
  CHECK_THROWS_AS(J(CoefficientVector({1.0, 0.0}), 1, default_spec(1)), DivergenceError);
}

TEST_CASE("J under the k -> k + pi substitution") {
  const CoefficientVector c({0.4, 0.6, -0.3, -0.7});
  for (int d : {2, 3}) {
    const auto spec = default_spec(d);
    // After substituting k ↦ k + π: √(ε(k)/ε(k+π)) (∑ c_ℓ (-1)^ℓ T_ℓ)_+ .
    auto reflected = [&](std::span<const double> x) {
      std::vector<double> neg(x.begin(), x.end());
      for (auto& v : neg) v = -v;
      const double cs = cosine_sum_x(c, neg);
      if (cs <= 0.0) return 0.0;
      double g = 0.0;
      for (double v : x) g += v;
      g /= d;
      return std::sqrt((1.0 - g) / (1.0 + g)) * cs;
    };
    const auto direct = J(c, d, spec);
    const auto sub = integrate_cosine(reflected, d, spec);
    CHECK(std::abs(direct.value - sub.value) <= 3.0 * (direct.abs_error_estimate + sub.abs_error_estimate) + 1e-6);
  }
}

TEST_CASE("tilde I examples") {
  for (int d = 1; d <= 9; ++d) {
    const auto r = tilde_I(cross(), d, default_spec(d));
    CAPTURE(d);
    CHECK(std::abs(r.value - 1.0 / (2.0 * d)) < 1e-10);
  }
  const auto w = tilde_I(CoefficientVector({1.0, 0.0}), 3, default_spec(3));
  CHECK(std::abs(w.value - watson_integral(3)) < 1e-10);
  CHECK(w.value == doctest::Approx(0.252731).epsilon(1e-5));
  CHECK_THROWS_AS(tilde_I(CoefficientVector({1.0, 0.0}), 2, default_spec(2)), DivergenceError);
  // A numerator that is negative at k = 0 stays finite in low dimension.
  CHECK_NOTHROW(tilde_I(CoefficientVector({-0.5, 1.0, 0.0, -1.0}), 2, tensor(256)));
}

TEST_CASE("J limit examples") {
  const auto spec = default_spec(3);
  const auto zero_tail = J_limit(CoefficientVector({1.0, -1.0}, 0.0), 3, spec);
  CHECK(std::abs(zero_tail.value - J(cross(), 3, spec).value) < 1e-9);
  CHECK(J_limit(CoefficientVector({0.0}, 0.0), 3, spec).value == 0.0);
  CHECK_THROWS_AS(J_limit(CoefficientVector({1.0, 0.0}, 0.0), 3, spec), PreconditionError);
  CHECK_THROWS_AS(J_limit(CoefficientVector({1.0, 0.0}), 3, spec), PreconditionError);
  CHECK_THROWS_AS(J_limit(CoefficientVector({0.0, 1.0}, -1.0), 1, default_spec(1)), DivergenceError);
}

TEST_CASE("J limit is approached by the finite-N sequence") {
  const auto spec = default_spec(3);
  const double limit = J_limit(CoefficientVector({0.0, 1.0}, -1.0), 3, spec).value;
  double prev = 1e300;
  for (int N : {8, 16, 32}) {
    const double jn = J(finite_n(0.0, 1.0, -1.0, N), 3, spec).value;
    const double gap = std::abs(jn - limit);
    CAPTURE(N);
    CAPTURE(jn);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("tilde I limit examples") {
  const auto spec = default_spec(3);
  CHECK(std::abs(tilde_I_limit(CoefficientVector({1.0, -1.0}, 0.0), 3, spec).value - 1.0 / 6.0) < 1e-10);
  const double limit = tilde_I_limit(CoefficientVector({0.5, 0.5}, -1.0), 3, spec).value;
  CHECK(std::isfinite(limit));
  double prev = 1e300;
  for (int N : {8, 16, 32}) {
    const double tn = tilde_I(finite_n(0.5, 0.5, -1.0, N), 3, spec).value;
    const double gap = std::abs(tn - limit);
    CAPTURE(N);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 5e-3);
  // The limit numerator is (1 - g1(k'))_+ at k = 0, which 1/ε cannot absorb in d = 2.
  CHECK_THROWS_AS(tilde_I_limit(CoefficientVector({1.0, 0.0}, -1.0), 2, default_spec(2)), DivergenceError);
}

TEST_CASE("limit integrals match direct 2d-dimensional QMC") {
  for (int d : {3, 4}) {
    const auto spec = default_spec(d);
    const auto q = qmc(1 << 20);
    for (double eta : {0.3, 0.8}) {
      const CoefficientVector c({1.0 - eta, eta}, -1.0);
      const auto j = J_limit(c, d, spec);
      const auto jd = J_limit_direct(c, d, q);
      CAPTURE(d);
      CAPTURE(eta);
      CHECK(std::abs(j.value - jd.value) <= 3.0 * (j.abs_error_estimate + jd.abs_error_estimate) + 1e-4);
      const auto t = tilde_I_limit(c, d, spec);
      const auto td = tilde_I_limit_direct(c, d, q);
      CHECK(std::abs(t.value - td.value) <= 3.0 * (t.abs_error_estimate + td.abs_error_estimate) + 1e-4);
    }
  }
}

TEST_CASE("limit integrals with longer heads") {
  const auto spec = default_spec(3);
  const CoefficientVector c({0.2, 0.5, 0.3}, -1.0);
  const auto general = J_limit(c, 3, spec);
  const auto direct = J_limit_direct(c, 3, qmc(1 << 20));
  CHECK(std::abs(general.value - direct.value) <= 3.0 * (general.abs_error_estimate + direct.abs_error_estimate) + 1e-4);
}

TEST_CASE("g1 profile agrees with streaming integrals") {
  const auto spec = default_spec(3);
  const GProfile profile(3, spec);
  for (double eta : {0.0, 0.25, 0.7, 1.0}) {
    const CoefficientVector c({1.0 - eta, eta});
    CHECK(std::abs(profile.J(1.0 - eta, eta).value - J(c, 3, spec).value) < 1e-9);
    CHECK(std::abs(profile.tilde_I(1.0 - eta, eta).value - tilde_I(c, 3, spec).value) < 1e-9);
  }
}

TEST_CASE("harmonic table matches direct integrals") {
  const auto spec = tensor(32);
  const HarmonicTable table(3, 4, spec);
  const CoefficientVector c = table.coefficients(0.6, 0.4, -1.0);
  CHECK(c.head() == std::vector<double>{0.6, 0.4, 0.0, 0.0, -1.0});
  CHECK(std::abs(table.tilde_I(0.6, 0.4, -1.0).value - tilde_I(c, 3, spec).value) < 1e-10);
  const auto profile = table.alpha_profile(0.6, 0.4, -1.0);
  CHECK(std::abs(profile.value(0.3, 0.4).value - ical(c, 0.3, 3, 0.4, spec).value) < 1e-10);
}
