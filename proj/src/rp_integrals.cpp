#include "loopbound/rp_integrals.hpp"

#include <algorithm>
#include <list>
#include <mutex>
#include <tuple>
#include <cmath>
#include <numeric>
#include <sstream>

#include "loopbound/errors.hpp"
#include "loopbound/optimize.hpp"
#include "loopbound/parallel.hpp"
#include "loopbound/special.hpp"

namespace loopbound {
namespace {

constexpr double kAlphaTol = 1e-4;

double parse_double(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw PreconditionError("not a number: '" + token + "'");
  }
  while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) ++used;
  if (used != token.size()) throw PreconditionError("not a number: '" + token + "'");
  return v;
}

void require_head_only(const CoefficientVector& c, const char* op) {
  if (c.has_tail()) {
    throw PreconditionError(std::string(op) + " takes a head-only coefficient vector; use the limit variant");
  }
}

void require_tail(const CoefficientVector& c, const char* op) {
  if (!c.has_tail()) throw PreconditionError(std::string(op) + " needs a tail coefficient");
}

void require_dimension(int d) {
  if (d < 1) throw PreconditionError("dimension must be positive");
}

double g1_of(std::span<const double> x) {
  double s = 0.0;
  for (double xj : x) s += xj;
  return s / static_cast<double>(x.size());
}

// ε(k+π)/ε(k) in terms of x = cos k.
double ratio_of(std::span<const double> x) {
  double minus = 0.0;
  double plus = 0.0;
  for (double xj : x) {
    minus += 1.0 - xj;
    plus += 1.0 + xj;
  }
  return plus / minus;
}

double epsilon_of(std::span<const double> x) {
  double s = 0.0;
  for (double xj : x) s += 1.0 - xj;
  return 2.0 * s;
}

QuadratureResult combine_parts(QuadratureMethod method, const std::vector<double>& parts,
                               std::uint64_t evaluations) {
  QuadratureResult result;
  result.evaluations = evaluations;
  if (method == QuadratureMethod::TensorChebyshev) {
    result.value = parts[0];
    result.abs_error_estimate = parts.size() > 1 ? std::abs(parts[0] - parts[1]) : 0.0;
    return result;
  }
  result.value = ordered_sum(parts) / static_cast<double>(parts.size());
  if (parts.size() > 1) {
    KahanSum ss;
    for (double p : parts) ss.add((p - result.value) * (p - result.value));
    result.abs_error_estimate =
        std::sqrt(ss.value() / static_cast<double>(parts.size() - 1) / static_cast<double>(parts.size()));
  }
  return result;
}

std::size_t part_count(const QuadratureSpec& spec) {
  return spec.method == QuadratureMethod::TensorChebyshev ? 2 : spec.replicates;
}

// Visits the nodes of every part: tensor part 0 is the fine rule and part 1
// the coarse rule; QMC parts are replicates.
template <class Fn>
void visit_parts(int d, const QuadratureSpec& spec, Fn&& fn) {
  if (spec.method == QuadratureMethod::TensorChebyshev) {
    visit_cosine_nodes(d, spec, false, true, [&](std::size_t, double w, std::span<const double> x) { fn(0, w, x); });
    visit_cosine_nodes(d, spec, true, true, [&](std::size_t, double w, std::span<const double> x) { fn(1, w, x); });
  } else {
    visit_cosine_nodes(d, spec, false, true, fn);
  }
}

void check_j_finite(double value_at_origin, int d, double singular_weight) {
  if (d == 1 && value_at_origin > 0.0 && singular_weight > 0.0) {
    throw DivergenceError("J-type integral diverges for d = 1 when the cosine sum is positive at k = 0");
  }
}

QuadratureSpec as_qmc(QuadratureSpec spec) {
  spec.method = QuadratureMethod::QuasiMonteCarlo;
  return spec;
}

}  // namespace

CoefficientVector::CoefficientVector(std::vector<double> head, std::optional<double> tail)
    : head_(std::move(head)), tail_(tail) {
  if (head_.empty()) throw PreconditionError("coefficient vector needs at least one entry");
  for (double c : head_) {
    if (!std::isfinite(c)) throw PreconditionError("coefficients must be finite");
  }
  if (tail_ && !std::isfinite(*tail_)) throw PreconditionError("tail coefficient must be finite");
}

CoefficientVector CoefficientVector::parse(const std::string& text) {
  std::string head_text = text;
  std::optional<double> tail;
  if (const auto semi = text.find(';'); semi != std::string::npos) {
    head_text = text.substr(0, semi);
    tail = parse_double(text.substr(semi + 1));
  }
  std::vector<double> head;
  std::stringstream in(head_text);
  std::string token;
  while (std::getline(in, token, ',')) head.push_back(parse_double(token));
  return CoefficientVector(std::move(head), tail);
}

double CoefficientVector::head_sum() const noexcept {
  return std::accumulate(head_.begin(), head_.end(), 0.0);
}

double CoefficientVector::sum() const noexcept { return head_sum() + tail_.value_or(0.0); }

std::string CoefficientVector::to_string() const {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < head_.size(); ++i) out << (i ? "," : "") << head_[i];
  if (tail_) out << ";" << *tail_;
  return out.str();
}

void ModelParams::validate_for_bounds() const {
  if (d < 1) throw DomainError("d must be at least 1");
  if (theta < 2) throw DomainError("bounds need an integer theta >= 2");
  if (!(u >= 0.0 && u <= 0.5)) throw DomainError("bounds need u in [0, 1/2]");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
}

void ModelParams::validate_for_simulation() const {
  if (d < 1) throw DomainError("d must be at least 1");
  if (theta < 1) throw DomainError("simulation needs an integer theta >= 1");
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("u must lie in [0, 1]");
  if (!(beta > 0.0) || infinite_beta()) throw DomainError("simulation needs a finite positive beta");
}

double epsilon(std::span<const double> k) {
  double s = 0.0;
  for (double kj : k) s += 1.0 - std::cos(kj);
  return 2.0 * s;
}

double epsilon_shifted(std::span<const double> k) {
  double s = 0.0;
  for (double kj : k) s += 1.0 + std::cos(kj);
  return 2.0 * s;
}

double cosine_sum(const CoefficientVector& c, std::span<const double> k) {
  require_head_only(c, "cosine_sum");
  const double d = static_cast<double>(k.size());
  double total = 0.0;
  for (std::size_t l = 0; l < c.head().size(); ++l) {
    if (c.head()[l] == 0.0) continue;
    double s = 0.0;
    for (double kj : k) s += std::cos(static_cast<double>(l) * kj);
    total += c.head()[l] / d * s;
  }
  return total;
}

void harmonic_features(std::span<const double> x, int m, std::span<double> g) {
  const double inv_d = 1.0 / static_cast<double>(x.size());
  std::fill(g.begin(), g.begin() + m + 1, 0.0);
  g[0] = 1.0;
  if (m == 0) return;
  for (double xj : x) {
    double prev = 1.0;
    double cur = xj;
    g[1] += cur * inv_d;
    for (int l = 2; l <= m; ++l) {
      const double next = 2.0 * xj * cur - prev;
      prev = cur;
      cur = next;
      g[l] += cur * inv_d;
    }
  }
}

double cosine_sum_x(const CoefficientVector& c, std::span<const double> x) {
  const int m = c.degree();
  double buffer[64];
  std::vector<double> heap;
  double* g = buffer;
  if (m >= 64) {
    heap.resize(m + 1);
    g = heap.data();
  }
  harmonic_features(x, m, std::span<double>(g, m + 1));
  double total = 0.0;
  for (int l = 0; l <= m; ++l) total += c.head()[l] * g[l];
  return total;
}

QuadratureResult ical(const CoefficientVector& c, double u, int d, double alpha, const QuadratureSpec& spec) {
  require_head_only(c, "ical");
  require_dimension(d);
  if (!(u >= 0.0 && u <= 1.0)) throw PreconditionError("u must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("alpha must lie in [0, 1]");
  check_j_finite(c.head_sum(), d, (1.0 - u) * (1.0 - alpha));
  const double a = u * alpha;
  const double b = (1.0 - u) * (1.0 - alpha);
  return integrate_cosine(
      [&](std::span<const double> x) {
        const double cs = cosine_sum_x(c, x);
        if (cs <= 0.0) return 0.0;
        return std::sqrt(a + b * ratio_of(x)) * cs;
      },
      d, spec);
}

QuadratureResult ical_derivative(const CoefficientVector& c, double u, int d, double alpha,
                                 const QuadratureSpec& spec) {
  require_head_only(c, "ical_derivative");
  require_dimension(d);
  check_j_finite(c.head_sum(), d, 1.0 - u);
  const double a = u * alpha;
  const double b = (1.0 - u) * (1.0 - alpha);
  return integrate_cosine(
      [&](std::span<const double> x) {
        const double cs = cosine_sum_x(c, x);
        if (cs <= 0.0) return 0.0;
        const double r = ratio_of(x);
        return (u - (1.0 - u) * r) / (2.0 * std::sqrt(a + b * r)) * cs;
      },
      d, spec);
}

std::string to_string(AlphaRoute route) {
  switch (route) {
    case AlphaRoute::UZero: return "u-zero";
    case AlphaRoute::EvenSupport: return "even-support";
    case AlphaRoute::CrossHalf: return "cross-half";
    case AlphaRoute::EndpointZero: return "endpoint-zero";
    case AlphaRoute::EndpointOne: return "endpoint-one";
    case AlphaRoute::GoldenSection: return "golden-section";
  }
  return "unknown";
}

AlphaProfile::AlphaProfile(const CoefficientVector& c, int d, const QuadratureSpec& spec)
    : d_(d), method_(spec.method), parts_(part_count(spec)) {
  require_head_only(c, "AlphaProfile");
  require_dimension(d);
  spec.validate();
  visit_parts(d, spec, [&](std::size_t part, double w, std::span<const double> x) {
    const double cs = cosine_sum_x(c, x);
    if (cs <= 0.0) return;
    parts_[part].weight.push_back(w);
    parts_[part].ratio.push_back(ratio_of(x));
    parts_[part].positive.push_back(cs);
  });
  singular_ = d == 1 && c.head_sum() > 0.0;
}

template <class F>
QuadratureResult AlphaProfile::reduce(F&& f) const {
  std::vector<double> sums(parts_.size(), 0.0);
  std::uint64_t evaluations = 0;
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    const Part& part = parts_[p];
    KahanSum sum;
    for (std::size_t i = 0; i < part.weight.size(); ++i) sum.add(part.weight[i] * f(part.ratio[i]) * part.positive[i]);
    sums[p] = sum.value();
    evaluations += part.weight.size();
  }
  return combine_parts(method_, sums, evaluations);
}

QuadratureResult AlphaProfile::value(double u, double alpha) const {
  if (singular_) check_j_finite(1.0, d_, (1.0 - u) * (1.0 - alpha));
  const double a = u * alpha;
  const double b = (1.0 - u) * (1.0 - alpha);
  return reduce([a, b](double r) { return std::sqrt(a + b * r); });
}

QuadratureResult AlphaProfile::derivative(double u, double alpha) const {
  if (singular_) check_j_finite(1.0, d_, 1.0 - u);
  const double a = u * alpha;
  const double b = (1.0 - u) * (1.0 - alpha);
  return reduce([a, b, u](double r) { return (u - (1.0 - u) * r) / (2.0 * std::sqrt(a + b * r)); });
}

namespace {

bool even_support(const CoefficientVector& c) {
  const auto& h = c.head();
  if (h.size() > 1 && h[1] < 0.0) return false;
  for (std::size_t l = 3; l < h.size(); l += 2) {
    if (h[l] != 0.0) return false;
  }
  return true;
}

bool is_cross_pair(const CoefficientVector& c) {
  return c.head().size() == 2 && c.head()[0] == 1.0 && c.head()[1] == -1.0;
}

AlphaSup golden_on(const AlphaProfile& profile, double u) {
  const auto best = golden_max([&](double a) { return profile.value(u, a).value; }, 0.0, 1.0, kAlphaTol);
  const auto at = profile.value(u, best.x);
  return {at.value, best.x, at.abs_error_estimate, AlphaRoute::GoldenSection};
}

void require_u_for_sup(double u) {
  if (!(u >= 0.0 && u <= 0.5)) throw PreconditionError("sup over alpha needs u in [0, 1/2]");
}

}  // namespace

AlphaSup sup_alpha_I(const CoefficientVector& c, double u, int d, const QuadratureSpec& spec) {
  require_head_only(c, "sup_alpha_I");
  require_dimension(d);
  require_u_for_sup(u);
  if (is_cross_pair(c) && u == 0.5) {
    return {1.0 / std::sqrt(2.0), 1.0, 0.0, AlphaRoute::CrossHalf};
  }
  return sup_alpha_I(AlphaProfile(c, d, spec), c, u);
}

AlphaSup sup_alpha_I(const AlphaProfile& profile, const CoefficientVector& c, double u) {
  require_head_only(c, "sup_alpha_I");
  require_u_for_sup(u);
  if (u == 0.0) {
    const auto j = profile.value(0.0, 0.0);
    return {j.value, 0.0, j.abs_error_estimate, AlphaRoute::UZero};
  }
  if (even_support(c)) {
    const auto j = profile.value(0.0, 0.0);
    const double s = std::sqrt(1.0 - u);
    return {s * j.value, 0.0, s * j.abs_error_estimate, AlphaRoute::EvenSupport};
  }
  if (is_cross_pair(c) && u == 0.5) return {1.0 / std::sqrt(2.0), 1.0, 0.0, AlphaRoute::CrossHalf};

  const auto left = profile.derivative(u, 0.0);
  if (left.value <= 0.0) {
    const auto at = profile.value(u, 0.0);
    return {at.value, 0.0, at.abs_error_estimate, AlphaRoute::EndpointZero};
  }
  const auto right = profile.derivative(u, 1.0);
  if (right.value >= 0.0) {
    const auto at = profile.value(u, 1.0);
    return {at.value, 1.0, at.abs_error_estimate, AlphaRoute::EndpointOne};
  }
  return golden_on(profile, u);
}

AlphaSup sup_alpha_I_golden(const CoefficientVector& c, double u, int d, const QuadratureSpec& spec) {
  require_u_for_sup(u);
  const AlphaProfile profile(c, d, spec);
  return golden_on(profile, u);
}

QuadratureResult J(const CoefficientVector& c, int d, const QuadratureSpec& spec) {
  require_head_only(c, "J");
  require_dimension(d);
  check_j_finite(c.head_sum(), d, 1.0);
  return integrate_cosine(
      [&](std::span<const double> x) {
        const double cs = cosine_sum_x(c, x);
        if (cs <= 0.0) return 0.0;
        return std::sqrt(ratio_of(x)) * cs;
      },
      d, spec);
}

QuadratureResult tilde_I(const CoefficientVector& c, int d, const QuadratureSpec& spec) {
  require_head_only(c, "tilde_I");
  require_dimension(d);
  return integrate_inverse_epsilon(
      [&](std::span<const double> x) { return std::max(0.0, cosine_sum_x(c, x)); }, c.head_sum(), d, spec);
}

namespace {

void require_balanced(const CoefficientVector& c) {
  const double scale = std::max(1.0, std::abs(*c.tail()));
  if (std::abs(c.sum()) > 1e-12 * scale) {
    throw PreconditionError("J_limit needs sum(head) + tail = 0, got " + std::to_string(c.sum()));
  }
}

}  // namespace

QuadratureResult J_limit(const CoefficientVector& c, int d, const QuadratureSpec& spec) {
  require_tail(c, "J_limit");
  require_dimension(d);
  require_balanced(c);
  const GProfile profile(d, spec);
  if (c.head().size() <= 2) {
    const double b = c.head().size() > 1 ? c.head()[1] : 0.0;
    return profile.J_limit(c.head()[0], b, *c.tail());
  }
  return profile.limit_general(c, spec, false);
}

QuadratureResult tilde_I_limit(const CoefficientVector& c, int d, const QuadratureSpec& spec) {
  require_tail(c, "tilde_I_limit");
  require_dimension(d);
  const GProfile profile(d, spec);
  if (c.head().size() <= 2) {
    const double b = c.head().size() > 1 ? c.head()[1] : 0.0;
    return profile.tilde_I_limit(c.head()[0], b, *c.tail());
  }
  return profile.limit_general(c, spec, true);
}

QuadratureResult J_limit_direct(const CoefficientVector& c, int d, const QuadratureSpec& spec) {
  require_tail(c, "J_limit_direct");
  require_dimension(d);
  require_balanced(c);
  const double tail = *c.tail();
  const CoefficientVector head(c.head());
  const double at_origin = c.head_sum() + std::abs(tail);
  check_j_finite(at_origin, d, 1.0);
  return integrate_cosine(
      [&](std::span<const double> x) {
        const auto k = x.first(d);
        const double v = cosine_sum_x(head, k) + tail * g1_of(x.subspan(d));
        if (v <= 0.0) return 0.0;
        return std::sqrt(ratio_of(k)) * v;
      },
      2 * d, as_qmc(spec), false);
}

QuadratureResult tilde_I_limit_direct(const CoefficientVector& c, int d, const QuadratureSpec& spec) {
  require_tail(c, "tilde_I_limit_direct");
  require_dimension(d);
  const double tail = *c.tail();
  const double s = c.head_sum();
  const CoefficientVector head(c.head());
  const bool singular = s + std::abs(tail) > 0.0;
  if (singular && d <= 2) throw DivergenceError("limit integral of 1/ε diverges for d <= 2");
  auto result = integrate_cosine(
      [&](std::span<const double> x) {
        const auto k = x.first(d);
        const double gt = g1_of(x.subspan(d));
        const double v = std::max(0.0, cosine_sum_x(head, k) + tail * gt);
        const double v0 = singular ? std::max(0.0, s + tail * gt) : 0.0;
        return (v - v0) / epsilon_of(k);
      },
      2 * d, as_qmc(spec), false);
  if (singular) {
    const auto mean = integrate_cosine(
        [&](std::span<const double> x) { return std::max(0.0, s + tail * g1_of(x)); }, d, as_qmc(spec), false);
    result.value += mean.value * watson_integral(d);
    result.abs_error_estimate += mean.abs_error_estimate * watson_integral(d);
  }
  return result;
}

}  // namespace loopbound

namespace loopbound {

GProfile::GProfile(int d, const QuadratureSpec& spec)
    : d_(d), method_(spec.method), parts_(part_count(spec)) {
  require_dimension(d);
  spec.validate();
  std::vector<std::vector<std::pair<double, double>>> raw(parts_.size());
  visit_parts(d, spec, [&](std::size_t part, double w, std::span<const double> x) {
    raw[part].emplace_back(g1_of(x), w);
  });
  for (std::size_t p = 0; p < raw.size(); ++p) {
    auto& nodes = raw[p];
    std::sort(nodes.begin(), nodes.end());
    Part& part = parts_[p];
    const std::size_t n = nodes.size();
    part.g.resize(n);
    part.w.resize(n);
    part.sqrt_ratio.resize(n);
    for (auto* v : {&part.w0, &part.w1, &part.r0, &part.r1, &part.e0, &part.e1}) v->assign(n + 1, 0.0);
    KahanSum w0, w1, r0, r1, e0, e1;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = nodes[i].first;
      const double w = nodes[i].second;
      const double sr = std::sqrt((1.0 + g) / (1.0 - g));
      part.g[i] = g;
      part.w[i] = w;
      part.sqrt_ratio[i] = sr;
      w0.add(w);
      w1.add(w * g);
      r0.add(w * sr);
      r1.add(w * sr * g);
      e0.add(w / (1.0 - g));
      e1.add(w * g / (1.0 - g));
      part.w0[i + 1] = w0.value();
      part.w1[i + 1] = w1.value();
      part.r0[i + 1] = r0.value();
      part.r1[i + 1] = r1.value();
      part.e0[i + 1] = e0.value();
      part.e1[i + 1] = e1.value();
    }
    nodes.clear();
    nodes.shrink_to_fit();
  }
}

std::pair<std::size_t, std::size_t> GProfile::Part::positive_range(double a, double b) const {
  const std::size_t n = g.size();
  if (b == 0.0) return a > 0.0 ? std::pair{std::size_t{0}, n} : std::pair{std::size_t{0}, std::size_t{0}};
  const double threshold = -a / b;
  const auto upper = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), threshold) - g.begin());
  if (b > 0.0) return {upper, n};
  const auto lower = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), threshold) - g.begin());
  return {0, lower};
}

double GProfile::Part::tail_average(double a, double tail) const {
  const auto [lo, hi] = positive_range(a, tail);
  return a * (w0[hi] - w0[lo]) + tail * (w1[hi] - w1[lo]);
}

double GProfile::Part::j(double a, double b) const {
  const auto [lo, hi] = positive_range(a, b);
  return a * (r0[hi] - r0[lo]) + b * (r1[hi] - r1[lo]);
}

double GProfile::Part::tilde_i(double a, double b, double watson, double two_d) const {
  const auto [lo, hi] = positive_range(a, b);
  const double s = a + b;
  if (s > 0.0) {
    // On the positive set the remainder ((a + b g) - s)/ε is exactly -b/(2d);
    // off it the numerator vanishes and -s/ε is bounded there.
    const std::size_t n = g.size();
    const double off = (e0[lo] - e0[0]) + (e0[n] - e0[hi]);
    return s * watson - (b * (w0[hi] - w0[lo]) + s * off) / two_d;
  }
  if (s == 0.0) return -b * (w0[hi] - w0[lo]) / two_d;
  return (a * (e0[hi] - e0[lo]) + b * (e1[hi] - e1[lo])) / two_d;
}

namespace {

// E[(a + tail·g)_+] along a monotone sequence of a values, with a cursor that
// tracks the threshold index so a full sweep is linear.
class TailCursor {
 public:
  TailCursor(const std::vector<double>& g, const std::vector<double>& w0, const std::vector<double>& w1,
             double tail)
      : g_(g), w0_(w0), w1_(w1), tail_(tail) {}

  double operator()(double a) {
    const std::size_t n = g_.size();
    if (tail_ == 0.0) return std::max(a, 0.0) * w0_[n];
    const double threshold = -a / tail_;
    while (pos_ < n && g_[pos_] <= threshold) ++pos_;
    while (pos_ > 0 && g_[pos_ - 1] > threshold) --pos_;
    if (tail_ > 0.0) return a * (w0_[n] - w0_[pos_]) + tail_ * (w1_[n] - w1_[pos_]);
    return a * w0_[pos_] + tail_ * w1_[pos_];
  }

 private:
  const std::vector<double>& g_;
  const std::vector<double>& w0_;
  const std::vector<double>& w1_;
  double tail_;
  std::size_t pos_ = 0;
};

}  // namespace

double GProfile::Part::j_limit(double a, double b, double tail) const {
  TailCursor phi(g, w0, w1, tail);
  KahanSum sum;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = phi(a + b * g[i]);
    if (v > 0.0) sum.add(w[i] * sqrt_ratio[i] * v);
  }
  return sum.value();
}

double GProfile::Part::tilde_i_limit(double a, double b, double tail, double watson, double two_d) const {
  TailCursor phi(g, w0, w1, tail);
  const double at_origin = tail_average(a + b, tail);
  KahanSum sum;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = phi(a + b * g[i]);
    sum.add(w[i] * (v - at_origin) / (two_d * (1.0 - g[i])));
  }
  return at_origin * watson + sum.value();
}

template <class F>
QuadratureResult GProfile::reduce(F&& f) const {
  std::vector<double> values(parts_.size());
  std::uint64_t evaluations = 0;
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    values[p] = f(parts_[p]);
    evaluations += parts_[p].g.size();
  }
  return combine_parts(method_, values, evaluations);
}

QuadratureResult GProfile::J(double a, double b) const {
  check_j_finite(a + b, d_, 1.0);
  return reduce([&](const Part& p) { return p.j(a, b); });
}

QuadratureResult GProfile::tilde_I(double a, double b) const {
  const double s = a + b;
  if (s > 0.0 && d_ <= 2) {
    throw DivergenceError("tilde_I diverges: the cosine sum is positive at k = 0 and d <= 2");
  }
  const double watson = s > 0.0 ? watson_integral(d_) : 0.0;
  return reduce([&](const Part& p) { return p.tilde_i(a, b, watson, 2.0 * d_); });
}

QuadratureResult GProfile::J_limit(double a, double b, double tail) const {
  if (d_ == 1 && parts_[0].tail_average(a + b, tail) > 0.0) {
    throw DivergenceError("J limit integral diverges for d = 1");
  }
  return reduce([&](const Part& p) { return p.j_limit(a, b, tail); });
}

QuadratureResult GProfile::tilde_I_limit(double a, double b, double tail) const {
  if (d_ <= 2 && parts_[0].tail_average(a + b, tail) > 0.0) {
    throw DivergenceError("tilde_I limit integral diverges for d <= 2");
  }
  const double watson = d_ >= 3 ? watson_integral(d_) : 0.0;
  return reduce([&](const Part& p) { return p.tilde_i_limit(a, b, tail, watson, 2.0 * d_); });
}

QuadratureResult GProfile::limit_general(const CoefficientVector& c, const QuadratureSpec& spec, bool tilde) const {
  require_tail(c, "limit_general");
  if (spec.method != method_ || part_count(spec) != parts_.size()) {
    throw PreconditionError("limit_general: spec does not match the profile's rule");
  }
  const CoefficientVector head(c.head());
  const double tail = *c.tail();
  const double s = c.head_sum();
  const double origin = parts_[0].tail_average(s, tail);
  if (origin > 0.0 && (tilde ? d_ <= 2 : d_ == 1)) {
    throw DivergenceError("limit integral diverges in d = " + std::to_string(d_));
  }
  const double watson = tilde && origin > 0.0 ? watson_integral(d_) : 0.0;
  std::vector<KahanSum> sums(parts_.size());
  std::vector<double> at_origin(parts_.size());
  for (std::size_t p = 0; p < parts_.size(); ++p) at_origin[p] = parts_[p].tail_average(s, tail);
  std::uint64_t evaluations = 0;
  visit_parts(d_, spec, [&](std::size_t part, double w, std::span<const double> x) {
    ++evaluations;
    const double phi = parts_[part].tail_average(cosine_sum_x(head, x), tail);
    if (tilde) {
      sums[part].add(w * (phi - at_origin[part]) / epsilon_of(x));
    } else if (phi > 0.0) {
      sums[part].add(w * std::sqrt(ratio_of(x)) * phi);
    }
  });
  std::vector<double> values(parts_.size());
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    values[p] = sums[p].value() + (tilde ? at_origin[p] * watson : 0.0);
  }
  return combine_parts(method_, values, evaluations);
}

}  // namespace loopbound

namespace loopbound {

HarmonicTable::HarmonicTable(int d, int m, const QuadratureSpec& spec)
    : d_(d), m_(m), method_(spec.method), parts_(part_count(spec)) {
  require_dimension(d);
  if (m < 1) throw PreconditionError("HarmonicTable needs m >= 1");
  spec.validate();
  std::vector<double> g(m + 1);
  visit_parts(d, spec, [&](std::size_t part, double w, std::span<const double> x) {
    harmonic_features(x, m, g);
    parts_[part].w.push_back(w);
    parts_[part].g1.push_back(g[1]);
    parts_[part].gm.push_back(g[m]);
  });
}

CoefficientVector HarmonicTable::coefficients(double a, double b, double cm) const {
  std::vector<double> head(m_ + 1, 0.0);
  head[0] = a;
  head[1] += b;
  head[m_] += cm;
  return CoefficientVector(std::move(head));
}

AlphaProfile HarmonicTable::alpha_profile(double a, double b, double cm) const {
  AlphaProfile profile(d_, method_, parts_.size());
  profile.singular_ = d_ == 1 && a + b + cm > 0.0;
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    const Part& part = parts_[p];
    auto& out = profile.parts_[p];
    for (std::size_t i = 0; i < part.w.size(); ++i) {
      const double cs = a + b * part.g1[i] + cm * part.gm[i];
      if (cs <= 0.0) continue;
      out.weight.push_back(part.w[i]);
      out.ratio.push_back((1.0 + part.g1[i]) / (1.0 - part.g1[i]));
      out.positive.push_back(cs);
    }
  }
  return profile;
}

QuadratureResult HarmonicTable::tilde_I(double a, double b, double cm) const {
  const double s = a + b + cm;
  if (s > 0.0 && d_ <= 2) throw DivergenceError("tilde_I diverges: the cosine sum is positive at k = 0 and d <= 2");
  const double shift = std::max(s, 0.0);
  const double two_d = 2.0 * d_;
  std::vector<double> values(parts_.size());
  std::uint64_t evaluations = 0;
  for (std::size_t p = 0; p < parts_.size(); ++p) {
    const Part& part = parts_[p];
    KahanSum sum;
    for (std::size_t i = 0; i < part.w.size(); ++i) {
      const double cs = std::max(0.0, a + b * part.g1[i] + cm * part.gm[i]);
      sum.add(part.w[i] * (cs - shift) / (two_d * (1.0 - part.g1[i])));
    }
    values[p] = sum.value() + (shift > 0.0 ? shift * watson_integral(d_) : 0.0);
    evaluations += part.w.size();
  }
  return combine_parts(method_, values, evaluations);
}

std::shared_ptr<const GProfile> shared_profile(int d, const QuadratureSpec& spec) {
  using Key = std::tuple<int, int, std::size_t, std::size_t, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::list<std::pair<Key, std::shared_ptr<const GProfile>>> cache;
  constexpr std::size_t kCapacity = 3;
  const Key key{d, static_cast<int>(spec.method), spec.nodes_per_axis, spec.sample_count, spec.replicates, spec.seed};
  {
    std::lock_guard lock(mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      if (it->first == key) {
        cache.splice(cache.begin(), cache, it);
        return cache.front().second;
      }
    }
  }
  auto profile = std::make_shared<const GProfile>(d, spec);
  std::lock_guard lock(mutex);
  cache.emplace_front(key, profile);
  if (cache.size() > kCapacity) cache.pop_back();
  return profile;
}

}  // namespace loopbound
