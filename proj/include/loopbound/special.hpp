#pragma once

namespace loopbound {

/// e^{-x} I_0(x) for x >= 0, accurate to a few ulp over the whole range.
double bessel_i0_scaled(double x);

/// Lattice Green function at the origin, W_d = ∫ d^dk/(2π)^d 1/ε(k), from
/// W_d = ∫_0^∞ (e^{-2t} I_0(2t))^d dt. Finite only for d >= 3.
double watson_integral(int d);

}  // namespace loopbound
