#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loopbound/quadrature.hpp"

namespace loopbound {

/// Coefficients c = (c_0, ..., c_m), optionally with a tail coefficient c_∞
/// used by the N → ∞ limit integrals.
class CoefficientVector {
 public:
  explicit CoefficientVector(std::vector<double> head, std::optional<double> tail = std::nullopt);

  /// Parses "1,-1" or "1,-1;-1" (tail after the semicolon).
  static CoefficientVector parse(const std::string& text);

  const std::vector<double>& head() const noexcept { return head_; }
  const std::optional<double>& tail() const noexcept { return tail_; }
  bool has_tail() const noexcept { return tail_.has_value(); }
  int degree() const noexcept { return static_cast<int>(head_.size()) - 1; }

  /// ∑ head (+ tail if present).
  double sum() const noexcept;
  double head_sum() const noexcept;

  std::string to_string() const;

 private:
  std::vector<double> head_;
  std::optional<double> tail_;
};

struct ModelParams {
  static constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

  int d = 3;
  int theta = 2;
  double u = 0.0;
  double beta = kInfiniteBeta;

  bool infinite_beta() const noexcept { return beta == kInfiniteBeta; }
  /// Bounds require θ >= 2 and u in [0, 1/2]; simulation allows θ >= 1 and u in [0, 1].
  void validate_for_bounds() const;
  void validate_for_simulation() const;
};

double epsilon(std::span<const double> k);
double epsilon_shifted(std::span<const double> k);

/// ∑_ℓ ∑_j (c_ℓ/d) cos(ℓ k_j) for a head-only c.
double cosine_sum(const CoefficientVector& c, std::span<const double> k);

/// Chebyshev features g_ℓ(x) = (1/d) ∑_j T_ℓ(x_j) for ℓ = 0..m.
void harmonic_features(std::span<const double> x, int m, std::span<double> g);

/// Same cosine sum expressed in x = cos k.
double cosine_sum_x(const CoefficientVector& c, std::span<const double> x);

/// 𝓘^{u,d}_c(α).
QuadratureResult ical(const CoefficientVector& c, double u, int d, double alpha, const QuadratureSpec& spec);

/// d𝓘/dα. At α = 0 with u < 1 and at α = 1 with u > 0 the integrand is finite.
QuadratureResult ical_derivative(const CoefficientVector& c, double u, int d, double alpha,
                                 const QuadratureSpec& spec);

enum class AlphaRoute { UZero, EvenSupport, CrossHalf, EndpointZero, EndpointOne, GoldenSection };

std::string to_string(AlphaRoute route);

struct AlphaSup {
  double value = 0.0;
  double argmax = 0.0;
  double error = 0.0;
  AlphaRoute route = AlphaRoute::GoldenSection;
};

/// Per-node data (weight, ε(k+π)/ε(k), positive part of the cosine sum) for
/// one c, restricted to nodes where the cosine sum is positive. Repeated
/// evaluations of 𝓘(α) then cost one pass over a flat array.
class AlphaProfile {
 public:
  AlphaProfile(const CoefficientVector& c, int d, const QuadratureSpec& spec);

  QuadratureResult value(double u, double alpha) const;
  QuadratureResult derivative(double u, double alpha) const;
  int d() const noexcept { return d_; }

 private:
  friend class HarmonicTable;
  AlphaProfile(int d, QuadratureMethod method, std::size_t parts) : d_(d), method_(method), parts_(parts) {}

  struct Part {
    std::vector<double> weight;
    std::vector<double> ratio;
    std::vector<double> positive;
  };
  template <class F>
  QuadratureResult reduce(F&& f) const;

  int d_;
  QuadratureMethod method_;
  std::vector<Part> parts_;  // tensor: {fine, coarse}; QMC: one per replicate
  bool singular_ = false;
};

/// I^{u,d}_c = sup_α 𝓘(α) with the shortcut routes tried first.
AlphaSup sup_alpha_I(const CoefficientVector& c, double u, int d, const QuadratureSpec& spec);

/// Same resolution on a prebuilt profile of c.
AlphaSup sup_alpha_I(const AlphaProfile& profile, const CoefficientVector& c, double u);

/// Chebyshev features g_1 and g_m at every node of a rule, for repeated
/// integrals over c = (a, b, 0, ..., 0, c_m) such as the η families.
class HarmonicTable {
 public:
  HarmonicTable(int d, int m, const QuadratureSpec& spec);

  int d() const noexcept { return d_; }
  int m() const noexcept { return m_; }

  /// c = (a, b, 0, ..., 0, cm) of length m + 1.
  CoefficientVector coefficients(double a, double b, double cm) const;
  AlphaProfile alpha_profile(double a, double b, double cm) const;
  QuadratureResult tilde_I(double a, double b, double cm) const;

 private:
  struct Part {
    std::vector<double> w, g1, gm;
  };
  int d_;
  int m_;
  QuadratureMethod method_;
  std::vector<Part> parts_;
};

/// Golden-section search only, bypassing every shortcut.
AlphaSup sup_alpha_I_golden(const CoefficientVector& c, double u, int d, const QuadratureSpec& spec);

QuadratureResult J(const CoefficientVector& c, int d, const QuadratureSpec& spec);
QuadratureResult tilde_I(const CoefficientVector& c, int d, const QuadratureSpec& spec);
QuadratureResult J_limit(const CoefficientVector& c, int d, const QuadratureSpec& spec);
QuadratureResult tilde_I_limit(const CoefficientVector& c, int d, const QuadratureSpec& spec);

/// Limit integrals by plain QMC in all 2d coordinates (cross-check route).
QuadratureResult J_limit_direct(const CoefficientVector& c, int d, const QuadratureSpec& spec);
QuadratureResult tilde_I_limit_direct(const CoefficientVector& c, int d, const QuadratureSpec& spec);

class GProfile;

/// Memoized GProfile for (d, spec); profiles are large, so only the most
/// recently used few are kept.
std::shared_ptr<const GProfile> shared_profile(int d, const QuadratureSpec& spec);

/// Distribution of g_1 = (1/d)∑ cos k_j under a quadrature rule, sorted, with
/// prefix sums. Gives every two-term integral (c = (a, b), optional tail)
/// in O(log N), or O(N) for the limit integrals.
class GProfile {
 public:
  GProfile(int d, const QuadratureSpec& spec);

  int d() const noexcept { return d_; }

  QuadratureResult J(double a, double b) const;
  QuadratureResult tilde_I(double a, double b) const;
  QuadratureResult J_limit(double a, double b, double tail) const;
  QuadratureResult tilde_I_limit(double a, double b, double tail) const;

  /// Limit integrals for heads of any length; the k-side nodes are visited
  /// again with the rule this profile was built from.
  QuadratureResult limit_general(const CoefficientVector& c, const QuadratureSpec& spec, bool tilde) const;

 private:
  struct Part {
    std::vector<double> g;     // ascending
    std::vector<double> w;     // weight
    std::vector<double> sqrt_ratio;
    // prefix sums, size N + 1
    std::vector<double> w0, w1, r0, r1, e0, e1;

    // Index range [lo, hi) where a + b g > 0.
    std::pair<std::size_t, std::size_t> positive_range(double a, double b) const;
    double tail_average(double a, double tail) const;  // E[(a + tail·g)_+]
    double j(double a, double b) const;
    double tilde_i(double a, double b, double watson, double two_d) const;
    double j_limit(double a, double b, double tail) const;
    double tilde_i_limit(double a, double b, double tail, double watson, double two_d) const;
  };
  template <class F>
  QuadratureResult reduce(F&& f) const;

  int d_;
  QuadratureMethod method_;
  std::vector<Part> parts_;
};

}  // namespace loopbound
