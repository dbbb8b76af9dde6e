#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "loopbound/quadrature.hpp"
#include "loopbound/rp_integrals.hpp"

namespace loopbound {

struct BoundResult {
  double value = 0.0;
  std::optional<double> argmax_eta;
  std::map<std::string, double> components;
  double error_estimate = 0.0;
};

/// Envelope h_p(x): 1 - p + 2x√p for x <= √p, 1 + x² for √p < x <= 1, 2x beyond.
double h(double p, double x);

/// (√(ζ² + 1 - t) - ζ)², the positive root of the nearest-neighbour
/// quadratic; t = θ/(4dβ). Throws DomainError when the radicand is negative.
double quadratic_root_bound(double zeta, double t);

/// P_{β,θ,u,d}.
BoundResult nn_lower_bound(const ModelParams& p, const QuadratureSpec& spec);

/// Proposition-style bound for c(η) = (1-η, η, 0, ..., 0, -1) of length m + 1.
BoundResult finite_range_bound(int m, const ModelParams& p, const QuadratureSpec& spec);

/// m → ∞ version with the limit integrals. At β = ∞ the value is the
/// limit of the finite-β bounds, hence 0 for d <= 2 where Ĩ_{c,∞} = ∞.
BoundResult long_range_bound(const ModelParams& p, const QuadratureSpec& spec);

enum class GammaMethod { Ueltschi, New };
std::string to_string(GammaMethod method);

/// b_γ functionals and the γ thresholds for one dimension. Holds the g_1
/// profile so the nested optimisations cost O(log N) per J evaluation.
class GammaAnalysis {
 public:
  GammaAnalysis(int d, const QuadratureSpec& spec);

  int d() const noexcept { return d_; }

  /// J^d_{(1-η, η)}.
  double J_eta(double eta) const;
  double b_gamma(double eta, double p, double gamma) const;
  /// Lower end of the p-range for b_new: P with ζ = γ J_{(1,-1)}/(2√2).
  double p_gamma(double gamma) const;
  /// inf over p in [0,1] of max(b_γ(0,p), b_γ(1,p)), solved exactly.
  double b_ueltschi(double gamma) const;
  /// inf over p in [P_γ,1] of sup over η in [0,1] of b_γ(η,p).
  double b_new(double gamma) const;
  /// sup{γ : b(γ) > 0} by bisection.
  double threshold(GammaMethod method, double tol = 5e-3) const;
  /// √(2/(J_{(1,0)} J_{(0,1)})).
  double ueltschi_closed_form() const;

 private:
  int d_;
  std::shared_ptr<const GProfile> profile_;
  double j10_;
  double j01_;
  double j_cross_;
};

double b_gamma(double eta, double p_val, double gamma, int d, const QuadratureSpec& spec);
double gamma_threshold(GammaMethod method, int d, const QuadratureSpec& spec);

/// β̃_crit: infimum over feasible η in (0, 1] of
/// (θ/2) Ĩ_{(1-η,η)} / (1 - η h_{P_γ}(γ J_{(1-η,η)}/(2√2 η))), γ = θ√(1-u).
BoundResult beta_crit_upper(const ModelParams& p, const QuadratureSpec& spec);

/// ∑ c_ℓ κ_ℓ - θ√(p_edge/2) I^{u,d}_c - (θ/2β) Ĩ^d_c for caller-supplied κ_ℓ.
double theorem1_rhs(const CoefficientVector& c, const ModelParams& p, double p_edge,
                    std::span<const double> kappa, const QuadratureSpec& spec);

}  // namespace loopbound
