#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

#include "fiberfilm/errors.hpp"
#include "fiberfilm/model.hpp"

namespace fiberfilm {

enum class MobilityVariant { IntegralMean, Midpoint, ArithmeticMean };

inline std::string_view to_string(MobilityVariant v) {
  switch (v) {
    case MobilityVariant::IntegralMean: return "integral_mean";
    case MobilityVariant::Midpoint: return "midpoint";
    case MobilityVariant::ArithmeticMean: return "arithmetic_mean";
  }
  return "?";
}

inline MobilityVariant parse_mobility_variant(std::string_view s) {
  if (s == "integral_mean") return MobilityVariant::IntegralMean;
  if (s == "midpoint") return MobilityVariant::Midpoint;
  if (s == "arithmetic_mean") return MobilityVariant::ArithmeticMean;
  throw ConfigError("unknown mobility variant '" + std::string(s) + "'");
}

/// How the two-point mobility m(s1, s2) is formed from M.
struct MobilityDiscretization {
  MobilityVariant variant = MobilityVariant::IntegralMean;
  /// Base Simpson subinterval count (2, 3 or 4) for IntegralMean.
  int quadrature_subintervals = 4;
  /// |s1 - s2| <= threshold * max(s1, s2) takes the diagonal branch.
  double equality_threshold = 1e-12;
  /// Largest log-width of one Simpson subinterval; wider pairs get more
  /// subintervals than the base count.
  double max_log_step = 0.02;

  void validate() const {
    if (quadrature_subintervals < 2 || quadrature_subintervals > 4)
      throw ConfigError("mobility: quadrature_subintervals must be 2, 3 or 4");
    if (!(equality_threshold >= 0.0)) throw ConfigError("mobility: equality_threshold must be >= 0");
    if (!(max_log_step > 0.0)) throw ConfigError("mobility: max_log_step must be > 0");
  }
};

/// m(s1, s2) together with its partial derivatives in s1 and s2.
struct MobilityValue {
  double value;
  double d_first;
  double d_second;
};

namespace detail {

// (e^y - 1 - y) / y^2
inline double expm1_remainder(double y) noexcept {
  if (std::abs(y) < 1e-2) {
    return 0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y * (1.0 / 120.0 + y * (1.0 / 720.0 + y / 5040.0))));
  }
  return (std::expm1(y) - y) / (y * y);
}

inline int simpson_subintervals(const MobilityDiscretization& disc, double log_ratio) {
  const int base = disc.quadrature_subintervals;
  if (log_ratio <= base * disc.max_log_step) return base;
  int n = static_cast<int>(std::ceil(log_ratio / disc.max_log_step));
  if (n % 2 != 0) ++n;
  return n;
}

inline double simpson_weight(int k, int n) noexcept {
  if (n == 3) return (k == 0 || k == 3) ? 1.0 / 8.0 : 3.0 / 8.0;
  const double scale = 1.0 / (3.0 * n);
  if (k == 0 || k == n) return scale;
  return (k % 2 == 1 ? 4.0 : 2.0) * scale;
}

// Requires 0 < lo < hi with hi/lo above the equality threshold.
//
// m = (hi - lo) / int_lo^hi ds / M(s). With s = lo * exp(tau) the integral is
// x * sum_k w_k s_k / M(s_k), x = log(hi / lo), so m = D / S with D the
// logarithmic mean (hi - lo) / x and S the weighted sum.
inline MobilityValue integral_mean_ordered(const PhysicalModel& model, const MobilityDiscretization& disc,
                                           double lo, double hi) {
  const double x = std::log1p((hi - lo) / lo);
  const int n = simpson_subintervals(disc, x);
  double sum = 0.0;
  double dsum_lo = 0.0;
  double dsum_hi = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const double s = k == 0 ? lo : (k == n ? hi : lo * std::exp(t * x));
    const double mob = model.mobility_unchecked(s);
    const double dmob = model.mobility_derivative_unchecked(s);
    const double w = simpson_weight(k, n);
    const double g = s / mob;
    const double dg = (1.0 - s * dmob / mob) / mob;
    sum += w * g;
    dsum_lo += w * dg * (1.0 - t) * s / lo;
    dsum_hi += w * dg * t * s / hi;
  }
  const double log_mean = lo * std::expm1(x) / x;
  const double dmean_lo = expm1_remainder(x);
  const double dmean_hi = expm1_remainder(-x);
  const double value = log_mean / sum;
  return {value, dmean_lo / sum - value * dsum_lo / sum, dmean_hi / sum - value * dsum_hi / sum};
}

inline bool nearly_equal(const MobilityDiscretization& disc, double a, double b) noexcept {
  return std::abs(a - b) <= disc.equality_threshold * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// Evaluates m and its partials for the configured variant.
///
/// IntegralMean requires both arguments positive (1/M is singular at 0) and
/// throws PositivityViolation otherwise. Midpoint and ArithmeticMean use the
/// analytic continuation of M, so they accept slightly negative states.
inline MobilityValue evaluate_mobility(const PhysicalModel& model, const MobilityDiscretization& disc, double s1,
                                       double s2) {
  switch (disc.variant) {
    case MobilityVariant::Midpoint: {
      const double mid = 0.5 * (s1 + s2);
      const double dm = 0.5 * model.mobility_derivative_unchecked(mid);
      return {model.mobility_unchecked(mid), dm, dm};
    }
    case MobilityVariant::ArithmeticMean:
      return {0.5 * (model.mobility_unchecked(s1) + model.mobility_unchecked(s2)),
              0.5 * model.mobility_derivative_unchecked(s1), 0.5 * model.mobility_derivative_unchecked(s2)};
    case MobilityVariant::IntegralMean:
      break;
  }
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw PositivityViolation("integral-mean mobility: arguments must be positive");
  if (detail::nearly_equal(disc, s1, s2)) {
    const double mid = 0.5 * (s1 + s2);
    const double dm = 0.5 * model.mobility_derivative_unchecked(mid);
    return {model.mobility_unchecked(mid), dm, dm};
  }
  // Canonical ordering makes m(s1, s2) == m(s2, s1) bit for bit.
  if (s1 <= s2) return detail::integral_mean_ordered(model, disc, s1, s2);
  const MobilityValue r = detail::integral_mean_ordered(model, disc, s2, s1);
  return {r.value, r.d_second, r.d_first};
}

inline double m_integral_mean(const PhysicalModel& model, double s1, double s2,
                              const MobilityDiscretization& disc = {}) {
  MobilityDiscretization d = disc;
  d.variant = MobilityVariant::IntegralMean;
  return evaluate_mobility(model, d, s1, s2).value;
}

inline double m_midpoint(const PhysicalModel& model, double s1, double s2) {
  if (!(s1 >= 0.0) || !(s2 >= 0.0)) throw DomainError("midpoint mobility: negative argument");
  return model.mobility(0.5 * (s1 + s2));
}

inline double m_arithmetic_mean(const PhysicalModel& model, double s1, double s2) {
  if (!(s1 >= 0.0) || !(s2 >= 0.0)) throw DomainError("arithmetic-mean mobility: negative argument");
  return 0.5 * (model.mobility(s1) + model.mobility(s2));
}

struct DiscretizationReport {
  std::size_t samples = 0;
  double max_symmetry_violation = 0.0;   // |m(a,b) - m(b,a)|
  double max_diagonal_violation = 0.0;   // |m(s,s) - M(s)| / M(s)
  double min_value = std::numeric_limits<double>::infinity();  // empirical gamma(delta)
  std::size_t nonpositive = 0;
  double tolerance = 1e-12;

  bool symmetric() const { return max_symmetry_violation <= tolerance; }
  bool consistent_on_diagonal() const { return max_diagonal_violation <= tolerance; }
  bool bounded_below() const { return nonpositive == 0 && min_value > 0.0; }
  bool passed() const { return symmetric() && consistent_on_diagonal() && bounded_below(); }
};

/// Randomized check of symmetry, diagonal consistency and the positive lower
/// bound on [delta, 10]^2 with delta = 1e-3. Smoothness is not checked.
inline DiscretizationReport validate_discretization(const PhysicalModel& model, const MobilityDiscretization& disc,
                                                    std::size_t sample_count, std::uint64_t seed = 12345) {
  if (sample_count < 100) throw std::invalid_argument("validate_discretization: need at least 100 samples");
  constexpr double kDelta = 1e-3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(std::log(kDelta), std::log(10.0));
  DiscretizationReport report;
  report.samples = sample_count;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const double a = std::exp(dist(rng));
    const double b = std::exp(dist(rng));
    const double mab = evaluate_mobility(model, disc, a, b).value;
    const double mba = evaluate_mobility(model, disc, b, a).value;
    report.max_symmetry_violation = std::max(report.max_symmetry_violation, std::abs(mab - mba));
    const double maa = evaluate_mobility(model, disc, a, a).value;
    const double exact = model.mobility(a);
    report.max_diagonal_violation = std::max(report.max_diagonal_violation, std::abs(maa - exact) / exact);
    report.min_value = std::min(report.min_value, mab);
    if (!(mab > 0.0)) ++report.nonpositive;
  }
  return report;
}

}  // namespace fiberfilm
