#include "loopbound/special.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "loopbound/errors.hpp"

namespace loopbound {

double bessel_i0_scaled(double x) {
  x = std::abs(x);
  if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  // Hankel expansion; at x >= 500 the terms fall below 1e-17 well before
  // the series starts to diverge.
  const double t = 1.0 / (8.0 * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 40; ++k) {
    term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) * t / k;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double watson_integral(int d) {
  if (d <= 2) throw DivergenceError("Watson integral diverges for d <= 2");
  constexpr int kCached = 32;
  static std::array<double, kCached + 1> cache{};
  static std::mutex mutex;
  if (d <= kCached) {
    std::lock_guard lock(mutex);
    if (cache[d] > 0.0) return cache[d];
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  const double value = integrator.integrate(
      [d](double t) { return std::pow(bessel_i0_scaled(2.0 * t), d); }, 1e-14);
  if (d <= kCached) {
    std::lock_guard lock(mutex);
    cache[d] = value;
  }
  return value;
}

}  // namespace loopbound
