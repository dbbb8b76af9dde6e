#include "loopbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "loopbound/errors.hpp"
#include "loopbound/optimize.hpp"

namespace loopbound {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

// η protocol shared by the connection bounds.
constexpr double kEtaMin = 1e-6;
constexpr double kEtaMax = 32.0;
constexpr std::size_t kEtaGrid = 65;

double beta_term(const ModelParams& p) {
  return p.infinite_beta() ? 0.0 : p.theta / (2.0 * p.beta);
}

// ∂/∂I of -η h_P(θ' I/(2√2 η)) times the error in I, by central differences.
double propagate(double eta, double P, double scale, double I, double err) {
  if (err <= 0.0) return 0.0;
  const double up = eta * h(P, scale * (I + err) / (2.0 * kSqrt2 * eta));
  const double down = eta * h(P, scale * std::max(I - err, 0.0) / (2.0 * kSqrt2 * eta));
  return std::abs(up - down) / 2.0;
}

Extremum search_eta(const std::function<double(double)>& f) {
  const auto grid = log_grid(kEtaMin, kEtaMax, kEtaGrid);
  return grid_golden_max(f, grid, 1e-6);
}

}  // namespace

double h(double p, double x) {
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("h needs p in [0, 1]");
  if (!(x >= 0.0)) throw PreconditionError("h needs x >= 0");
  const double sp = std::sqrt(p);
  if (x <= sp) return 1.0 - p + 2.0 * x * sp;
  if (x <= 1.0) return 1.0 + x * x;
  return 2.0 * x;
}

double quadratic_root_bound(double zeta, double t) {
  const double radicand = zeta * zeta + 1.0 - t;
  if (radicand < 0.0) throw DomainError("negative radicand in the nearest-neighbour bound");
  const double root = std::sqrt(radicand) - zeta;
  return std::clamp(root * root, 0.0, 1.0);
}

BoundResult nn_lower_bound(const ModelParams& p, const QuadratureSpec& spec) {
  p.validate_for_bounds();
  const double threshold = p.theta / (4.0 * p.d);
  if (!p.infinite_beta() && p.beta < threshold) {
    throw DomainError("nearest-neighbour bound needs beta >= theta/(4d) = " + std::to_string(threshold));
  }
  const double t = p.infinite_beta() ? 0.0 : threshold / p.beta;
  BoundResult result;
  double I = 1.0 / kSqrt2;
  double err = 0.0;
  if (p.u != 0.5) {
    const auto sup = sup_alpha_I(CoefficientVector({1.0, -1.0}), p.u, p.d, spec);
    I = sup.value;
    err = sup.error;
    result.components["alpha"] = sup.argmax;
  } else {
    result.components["alpha"] = 1.0;
  }
  const double zeta = p.theta / (2.0 * kSqrt2) * I;
  result.value = quadratic_root_bound(zeta, t);
  if (err > 0.0) {
    const double dz = p.theta / (2.0 * kSqrt2) * err;
    result.error_estimate =
        std::abs(quadratic_root_bound(zeta + dz, t) - quadratic_root_bound(std::max(zeta - dz, 0.0), t)) / 2.0;
  }
  result.components["I"] = I;
  result.components["zeta"] = zeta;
  return result;
}

BoundResult finite_range_bound(int m, const ModelParams& p, const QuadratureSpec& spec) {
  if (m < 2) throw PreconditionError("finite_range_bound needs m >= 2");
  p.validate_for_bounds();
  const double P = nn_lower_bound(p, spec).value;
  const HarmonicTable table(p.d, m, spec);
  const double bt = beta_term(p);
  struct Eval {
    double I = 0.0, I_err = 0.0, tilde = 0.0, tilde_err = 0.0;
  };
  auto evaluate = [&](double eta) {
    Eval e;
    const auto profile = table.alpha_profile(1.0 - eta, eta, -1.0);
    const auto sup = sup_alpha_I(profile, table.coefficients(1.0 - eta, eta, -1.0), p.u);
    e.I = sup.value;
    e.I_err = sup.error;
    if (bt > 0.0) {
      const auto ti = table.tilde_I(1.0 - eta, eta, -1.0);
      e.tilde = ti.value;
      e.tilde_err = ti.abs_error_estimate;
    }
    return e;
  };
  auto objective = [&](double eta) {
    const Eval e = evaluate(eta);
    return 1.0 - eta * h(P, p.theta * e.I / (2.0 * kSqrt2 * eta)) - bt * e.tilde;
  };
  const auto best = search_eta(objective);
  const Eval e = evaluate(best.x);
  BoundResult result;
  result.value = std::clamp(best.value, 0.0, 1.0);
  result.argmax_eta = best.x;
  result.components = {{"P", P}, {"I", e.I}, {"tilde_I", e.tilde}, {"unclamped", best.value}};
  result.error_estimate = propagate(best.x, P, p.theta, e.I, e.I_err) + bt * e.tilde_err;
  return result;
}

BoundResult long_range_bound(const ModelParams& p, const QuadratureSpec& spec) {
  p.validate_for_bounds();
  const double bt = beta_term(p);
  if (bt > 0.0 && p.d <= 2) {
    throw DivergenceError("the limit integral of 1/ε diverges for d <= 2 at finite beta");
  }
  const double P = nn_lower_bound(p, spec).value;
  BoundResult result;
  result.components["P"] = P;
  if (p.d == 1) {
    // J_{c,∞} is infinite, so every η gives -∞ and the bound is vacuous.
    result.components["J_limit"] = kInf;
    result.components["unclamped"] = -kInf;
    return result;
  }
  const auto profile = shared_profile(p.d, spec);
  const double scale = p.theta * std::sqrt(1.0 - p.u);
  auto objective = [&](double eta) {
    const double j = profile->J_limit(1.0 - eta, eta, -1.0).value;
    double v = 1.0 - eta * h(P, scale * j / (2.0 * kSqrt2 * eta));
    if (bt > 0.0) v -= bt * profile->tilde_I_limit(1.0 - eta, eta, -1.0).value;
    return v;
  };
  const auto best = search_eta(objective);
  const auto j = profile->J_limit(1.0 - best.x, best.x, -1.0);
  result.value = std::clamp(best.value, 0.0, 1.0);
  result.argmax_eta = best.x;
  result.components["J_limit"] = j.value;
  result.components["unclamped"] = best.value;
  result.error_estimate = propagate(best.x, P, scale, j.value, j.abs_error_estimate);
  if (bt > 0.0) {
    const auto ti = profile->tilde_I_limit(1.0 - best.x, best.x, -1.0);
    result.components["tilde_I_limit"] = ti.value;
    result.error_estimate += bt * ti.abs_error_estimate;
  }
  if (p.d <= 2) {
    // β = ∞ is read as the limit of finite-β bounds, each of which is
    // vacuous here because Ĩ_{c,∞} is infinite. The β-free formula is kept
    // as a component.
    result.components["beta_free_formula"] = best.value;
    result.components["tilde_I_limit"] = kInf;
    result.value = 0.0;
    result.error_estimate = 0.0;
  }
  return result;
}

std::string to_string(GammaMethod method) { return method == GammaMethod::Ueltschi ? "ueltschi" : "new"; }

GammaAnalysis::GammaAnalysis(int d, const QuadratureSpec& spec) : d_(d) {
  if (d <= 2) throw DomainError("gamma thresholds need d >= 3");
  profile_ = shared_profile(d, spec);
  j10_ = profile_->J(1.0, 0.0).value;
  j01_ = profile_->J(0.0, 1.0).value;
  j_cross_ = profile_->J(1.0, -1.0).value;
}

double GammaAnalysis::J_eta(double eta) const {
  if (eta == 0.0) return j10_;
  if (eta == 1.0) return j01_;
  return profile_->J(1.0 - eta, eta).value;
}

double GammaAnalysis::b_gamma(double eta, double p, double gamma) const {
  if (!(eta >= 0.0)) throw PreconditionError("b_gamma needs eta >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("b_gamma needs p in [0, 1], got " + std::to_string(p));
  return 1.0 - eta + p * eta - gamma * std::sqrt(p / 2.0) * J_eta(eta);
}

double GammaAnalysis::p_gamma(double gamma) const {
  return quadratic_root_bound(gamma * j_cross_ / (2.0 * kSqrt2), 0.0);
}

double GammaAnalysis::b_ueltschi(double gamma) const {
  // With s = √p both branches are explicit: f0 is linear and decreasing,
  // f1 is convex, so max(f0, f1) is convex and its minimum sits at an
  // endpoint, the crossing, or the vertex of f1.
  const double a0 = gamma * j10_ / kSqrt2;
  const double a1 = gamma * j01_ / kSqrt2;
  auto f = [&](double s) { return std::max(1.0 - a0 * s, s * s - a1 * s); };
  double best = std::min(f(0.0), f(1.0));
  const double vertex = a1 / 2.0;
  if (vertex > 0.0 && vertex < 1.0) best = std::min(best, f(vertex));
  const double k = a1 - a0;
  const double crossing = (k + std::sqrt(k * k + 4.0)) / 2.0;
  if (crossing > 0.0 && crossing < 1.0) best = std::min(best, f(crossing));
  return best;
}

double GammaAnalysis::b_new(double gamma) const {
  const double lower = p_gamma(gamma);
  const auto eta_grid = linear_grid(0.0, 1.0, 65);
  auto inner = [&](double p) {
    return grid_golden_max([&](double eta) { return b_gamma(eta, p, gamma); }, eta_grid, 1e-5).value;
  };
  if (lower >= 1.0) return inner(1.0);
  return grid_golden_min(inner, linear_grid(lower, 1.0, 201), 1e-5).value;
}

double GammaAnalysis::threshold(GammaMethod method, double tol) const {
  auto b = [&](double gamma) { return method == GammaMethod::Ueltschi ? b_ueltschi(gamma) : b_new(gamma); };
  double lo = 0.0;
  double hi = 1.0;
  while (b(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw InfeasibleError("gamma threshold not bracketed");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (b(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double GammaAnalysis::ueltschi_closed_form() const { return std::sqrt(2.0 / (j10_ * j01_)); }

double b_gamma(double eta, double p_val, double gamma, int d, const QuadratureSpec& spec) {
  if (d == 1 && eta < 1.0) throw DivergenceError("J_{(1-η,η)} diverges in d = 1 for η < 1");
  if (d <= 2) {
    const double j = J(CoefficientVector({1.0 - eta, eta}), d, spec).value;
    return 1.0 - eta + p_val * eta - gamma * std::sqrt(p_val / 2.0) * j;
  }
  return GammaAnalysis(d, spec).b_gamma(eta, p_val, gamma);
}

double gamma_threshold(GammaMethod method, int d, const QuadratureSpec& spec) {
  return GammaAnalysis(d, spec).threshold(method);
}

BoundResult beta_crit_upper(const ModelParams& p, const QuadratureSpec& spec) {
  p.validate_for_bounds();
  if (p.d <= 2) throw DivergenceError("beta_crit_upper needs d >= 3: tilde_I_{(1-η,η)} diverges");
  const GammaAnalysis analysis(p.d, spec);
  const auto profile = shared_profile(p.d, spec);
  const double gamma = p.theta * std::sqrt(1.0 - p.u);
  const double P = analysis.p_gamma(gamma);
  auto denominator = [&](double eta) {
    const double j = analysis.J_eta(eta);
    if (eta == 0.0) return 1.0 - gamma * j / kSqrt2;
    return 1.0 - eta * h(P, gamma * j / (2.0 * kSqrt2 * eta));
  };
  auto objective = [&](double eta) {
    const double den = denominator(eta);
    if (den <= 0.0) return kInf;
    return 0.5 * p.theta * profile->tilde_I(1.0 - eta, eta).value / den;
  };
  const auto grid = linear_grid(0.0, 1.0, 201);
  bool feasible = false;
  for (double eta : grid) feasible = feasible || denominator(eta) > 0.0;
  if (!feasible) throw InfeasibleError("no η in [0, 1] gives a positive denominator");
  const auto best = grid_golden_min(objective, grid, 1e-6);
  const auto ti = profile->tilde_I(1.0 - best.x, best.x);
  BoundResult result;
  result.value = best.value;
  result.argmax_eta = best.x;
  result.components = {{"gamma", gamma},
                       {"P_gamma", P},
                       {"J", analysis.J_eta(best.x)},
                       {"tilde_I", ti.value},
                       {"denominator", denominator(best.x)}};
  result.error_estimate = 0.5 * p.theta * ti.abs_error_estimate / denominator(best.x);
  return result;
}

double theorem1_rhs(const CoefficientVector& c, const ModelParams& p, double p_edge,
                    std::span<const double> kappa, const QuadratureSpec& spec) {
  p.validate_for_bounds();
  if (kappa.size() != c.head().size()) {
    throw PreconditionError("theorem1_rhs: need one connection probability per coefficient");
  }
  if (!(p_edge >= 0.0 && p_edge <= 1.0)) throw PreconditionError("p_edge must lie in [0, 1]");
  double lhs = 0.0;
  for (std::size_t l = 0; l < kappa.size(); ++l) lhs += c.head()[l] * kappa[l];
  const double I = sup_alpha_I(c, p.u, p.d, spec).value;
  double rhs = lhs - p.theta * std::sqrt(p_edge / 2.0) * I;
  if (!p.infinite_beta()) rhs -= beta_term(p) * tilde_I(c, p.d, spec).value;
  return rhs;
}

}  // namespace loopbound
