#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "loopbound/errors.hpp"
#include "loopbound/quadrature.hpp"
#include "loopbound/special.hpp"

using namespace loopbound;

namespace {

QuadratureSpec tensor(std::size_t n) {
  QuadratureSpec s;
  s.nodes_per_axis = n;
  return s;
}

QuadratureSpec qmc(std::size_t samples, std::uint64_t seed = 0x5EED) {
  QuadratureSpec s;
  s.method = QuadratureMethod::QuasiMonteCarlo;
  s.sample_count = samples;
  s.seed = seed;
  return s;
}

// Closed form of the simple-cubic Watson integral divided by 2d = 6.
double watson3_closed_form() {
  using boost::math::tgamma;
  const double pi = std::numbers::pi;
  const double w = std::sqrt(6.0) / (32.0 * pi * pi * pi) * tgamma(1.0 / 24) * tgamma(5.0 / 24) *
                   tgamma(7.0 / 24) * tgamma(11.0 / 24);
  return w / 6.0;
}

}  // namespace

TEST_CASE("spec validation") {
  QuadratureSpec s;
  CHECK_NOTHROW(s.validate());
  s.nodes_per_axis = 1;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s = QuadratureSpec{};
  s.target_abs_error = 0.0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  CHECK(parse_method("tensor") == QuadratureMethod::TensorChebyshev);
  CHECK(parse_method("qmc") == QuadratureMethod::QuasiMonteCarlo);
  CHECK_THROWS_AS(parse_method("simpson"), PreconditionError);
}

TEST_CASE("constant integrand averages to one") {
  for (int n = 1; n <= 3; ++n) {
    const auto r = integrate_box([](std::span<const double>) { return 1.0; }, n, tensor(16));
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.abs_error_estimate <= 1e-14);
    const auto q = integrate_box([](std::span<const double>) { return 1.0; }, n, qmc(1 << 12));
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("odd harmonics average to zero") {
  auto f = [](std::span<const double> k) { return std::cos(k[0]) * std::cos(k[1]); };
  CHECK(std::abs(integrate_box(f, 2, tensor(32)).value) < 1e-14);
  CHECK(std::abs(integrate_box(f, 2, qmc(1 << 14)).value) < 1e-3);
}

TEST_CASE("|sin k| averages to 2/pi") {
  auto f = [](std::span<const double> k) { return std::abs(std::sin(k[0])); };
  const double exact = 2.0 / std::numbers::pi;
  const auto t = integrate_box(f, 1, tensor(4096));
  CHECK(std::abs(t.value - exact) < 1e-6);
  CHECK(std::abs(t.value - exact) <= 3.0 * t.abs_error_estimate + 1e-12);
  const auto q = integrate_box(f, 1, qmc(1 << 16));
  CHECK(std::abs(q.value - exact) < 1e-4);
  // Same integrand in cosine space: √(1 - x²).
  const auto c = integrate_cosine([](std::span<const double> x) { return std::sqrt(1.0 - x[0] * x[0]); }, 1,
                                  tensor(4096));
  CHECK(std::abs(c.value - exact) < 1e-6);
}

TEST_CASE("non-finite integrand reports the node") {
  auto f = [](std::span<const double> k) { return k[0] > 3.0 ? std::nan("") : 1.0; };
  try {
    integrate_box(f, 2, tensor(8));
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    REQUIRE(e.node().size() == 2);
    CHECK(e.node()[0] > 3.0);
  }
}

TEST_CASE("1/eps weighted dispersion gives 1/(2d)") {
  for (int d = 1; d <= 9; ++d) {
    const auto spec = d <= 4 ? tensor(16) : qmc(1 << 12);
    auto numerator = [d](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += 1.0 - v;
      return s / d;
    };
    const auto r = integrate_inverse_epsilon(numerator, 0.0, d, spec);
    CHECK(std::abs(r.value - 1.0 / (2.0 * d)) <= 1e-12);
  }
}

TEST_CASE("Watson integral in three dimensions") {
  const double oracle = watson3_closed_form();
  CHECK(oracle == doctest::Approx(0.252731).epsilon(1e-6));
  CHECK(std::abs(watson_integral(3) - oracle) < 1e-12);
  const auto r = integrate_inverse_epsilon([](std::span<const double>) { return 1.0; }, 1.0, 3, tensor(32));
  CHECK(std::abs(r.value - oracle) < 1e-12);
  const auto direct = watson_direct(3, 128);
  CHECK(std::abs(direct.value - oracle) < 1e-3);
}

TEST_CASE("Watson integral diverges in low dimension") {
  auto one = [](std::span<const double>) { return 1.0; };
  CHECK_THROWS_AS(integrate_inverse_epsilon(one, 1.0, 2, tensor(32)), DivergenceError);
  CHECK_THROWS_AS(integrate_inverse_epsilon(one, 1.0, 1, tensor(32)), DivergenceError);
  CHECK_THROWS_AS(watson_integral(2), DivergenceError);
}

TEST_CASE("Watson integral decreases with dimension towards 1/(2d)") {
  double prev = watson_integral(3);
  for (int d = 4; d <= 12; ++d) {
    const double w = watson_integral(d);
    CHECK(w < prev);
    CHECK(w > 1.0 / (2.0 * d));
    prev = w;
  }
}

TEST_CASE("scaled Bessel I0 matches the library across the switch point") {
  for (double x : {0.0, 0.5, 3.0, 40.0, 200.0, 499.0}) {
    CHECK(bessel_i0_scaled(x) == doctest::Approx(std::exp(-x) * std::cyl_bessel_i(0.0, x)).epsilon(1e-13));
  }
  // Asymptotic branch: e^{-x} I0(x) ≈ 1/√(2πx) (1 + 1/(8x)).
  const double x = 2000.0;
  CHECK(bessel_i0_scaled(x) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi * x) * (1 + 1 / (8 * x) + 9 / (128 * x * x))).epsilon(1e-10));
}

TEST_CASE("results are deterministic for a fixed spec") {
  auto f = [](std::span<const double> x) { return std::sqrt(std::abs(x[0] - x[1] * x[2])); };
  const auto a = integrate_cosine(f, 3, qmc(1 << 14, 7), false);
  const auto b = integrate_cosine(f, 3, qmc(1 << 14, 7), false);
  CHECK(a.value == b.value);
  CHECK(a.abs_error_estimate == b.abs_error_estimate);
  const auto c = integrate_cosine(f, 3, qmc(1 << 14, 8), false);
  CHECK(a.value != c.value);
  const auto t1 = integrate_cosine(f, 3, tensor(24), false);
  const auto t2 = integrate_cosine(f, 3, tensor(24), false);
  CHECK(t1.value == t2.value);
}

TEST_CASE("tensor and QMC agree on bounded integrands") {
  for (int d = 2; d <= 4; ++d) {
    // √(ε(k+π)/ε(k)) (1 - g1)_+ : the J integrand of c = (1,-1), bounded near k = 0.
    auto f = [d](std::span<const double> x) {
      double g = 0.0;
      for (double v : x) g += v;
      g /= d;
      return std::sqrt((1.0 + g) / (1.0 - g)) * (1.0 - g);
    };
    const auto t = integrate_cosine(f, d, tensor(d == 2 ? 512 : 64));
    const auto q = integrate_cosine(f, d, qmc(1 << 18));
    CAPTURE(d);
    CHECK(std::abs(t.value - q.value) <= 3.0 * (t.abs_error_estimate + q.abs_error_estimate) + 1e-6);
  }
}

TEST_CASE("symmetric enumeration equals the full tensor rule") {
  auto f = [](std::span<const double> x) { return std::exp(x[0] + x[1] + x[2]) * (1.0 + x[0] * x[1] * x[2]); };
  const auto s = integrate_cosine(f, 3, tensor(20), true);
  const auto full = integrate_cosine(f, 3, tensor(20), false);
  CHECK(s.value == doctest::Approx(full.value).epsilon(1e-13));
  CHECK(cosine_node_count(3, tensor(20), false, true) < cosine_node_count(3, tensor(20), false, false));
}

TEST_CASE("visitor weights sum to one per replicate") {
  auto spec = qmc(1 << 10);
  std::vector<double> sums(spec.replicates, 0.0);
  visit_cosine_nodes(3, spec, false, false,
                     [&](std::size_t r, double w, std::span<const double>) { sums[r] += w; });
  for (double s : sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  double total = 0.0;
  visit_cosine_nodes(4, tensor(10), true, true, [&](std::size_t, double w, std::span<const double>) { total += w; });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("default and refined specs") {
  CHECK(default_spec(3).method == QuadratureMethod::TensorChebyshev);
  CHECK(default_spec(6).method == QuadratureMethod::QuasiMonteCarlo);
  CHECK(default_spec(6).sample_count >= (std::size_t{1} << 20));
  const auto r = refined(default_spec(3), 2.0);
  CHECK(r.nodes_per_axis == 2 * default_spec(3).nodes_per_axis);
  CHECK(r.target_abs_error < default_spec(3).target_abs_error);
  CHECK_THROWS_AS(default_spec(0), PreconditionError);
}
