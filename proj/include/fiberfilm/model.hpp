#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "fiberfilm/errors.hpp"

namespace fiberfilm {

namespace detail {

// Taylor coefficients of phi about 0 (exact rationals).
inline constexpr std::array<double, 18> kPhiSeries = {
    1.0,          1.0,           3.0 / 20.0,     -1.0 / 40.0,
    1.0 / 140.0,  -3.0 / 1120.0, 1.0 / 840.0,    -1.0 / 1680.0,
    1.0 / 3080.0, -1.0 / 5280.0, 1.0 / 8580.0,   -3.0 / 40040.0,
    1.0 / 20020.0, -1.0 / 29120.0, 3.0 / 123760.0, -1.0 / 57120.0,
    1.0 / 77520.0, -1.0 / 103360.0};

// Below this |X| the closed form loses more than ~1e-13 to cancellation.
inline constexpr double kPhiSeriesSwitch = 0.1;

inline double phi_series(double x) noexcept {
  double acc = 0.0;
  for (auto it = kPhiSeries.rbegin(); it != kPhiSeries.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline double phi_series_derivative(double x) noexcept {
  double acc = 0.0;
  for (std::size_t k = kPhiSeries.size() - 1; k >= 1; --k) acc = acc * x + static_cast<double>(k) * kPhiSeries[k];
  return acc;
}

inline double phi_closed(double x) noexcept {
  const double y = 1.0 + x;
  const double y2 = y * y;
  const double bracket = y2 * y2 * (4.0 * std::log1p(x) - 3.0) + 4.0 * y2 - 1.0;
  return 3.0 * bracket / (16.0 * x * x * x);
}

inline double phi_closed_derivative(double x) noexcept {
  const double y = 1.0 + x;
  const double y2 = y * y;
  const double l = std::log1p(x);
  const double bracket = y2 * y2 * (4.0 * l - 3.0) + 4.0 * y2 - 1.0;
  const double dbracket = 4.0 * y2 * y * (4.0 * l - 2.0) + 8.0 * y;
  const double x3 = x * x * x;
  return 3.0 / 16.0 * (dbracket / x3 - 3.0 * bracket / (x3 * x));
}

}  // namespace detail

/// phi(X) for X > -1 without the X >= 0 contract check.
inline double phi_unchecked(double x) noexcept {
  if (std::abs(x) < detail::kPhiSeriesSwitch) return detail::phi_series(x);
  return detail::phi_closed(x);
}

inline double phi_derivative_unchecked(double x) noexcept {
  if (std::abs(x) < detail::kPhiSeriesSwitch) return detail::phi_series_derivative(x);
  return detail::phi_closed_derivative(x);
}

/// Geometric factor of the fiber mobility,
///   phi(X) = 3/(16 X^3) [(1+X)^4 (4 log(1+X) - 3) + 4(1+X)^2 - 1],
/// with phi(0) = 1.
inline double phi(double x) {
  if (!(x >= 0.0)) throw DomainError("phi: argument must be nonnegative");
  return phi_unchecked(x);
}

inline double phi_derivative(double x) {
  if (!(x >= 0.0)) throw DomainError("phi_derivative: argument must be nonnegative");
  return phi_derivative_unchecked(x);
}

enum class ModelFamily { FSM, CM, PowerLaw };

inline std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::FSM: return "fsm";
    case ModelFamily::CM: return "cm";
    case ModelFamily::PowerLaw: return "power_law";
  }
  return "?";
}

inline ModelFamily parse_model_family(std::string_view s) {
  if (s == "fsm") return ModelFamily::FSM;
  if (s == "cm") return ModelFamily::CM;
  if (s == "power_law" || s == "powerlaw") return ModelFamily::PowerLaw;
  throw ConfigError("unknown model family '" + std::string(s) + "'");
}

/// Dimensionless parameters shared by all model families.
struct ModelParams {
  double alpha = 0.0;           // aspect ratio
  double eta = 1.0;             // azimuthal-curvature scale
  double a_h = 0.0;             // stabilization coefficient
  double lambda = 0.0;          // slip coefficient
  double mobility_order = 3.0;  // exponent for PowerLaw
  // PowerLaw only: use the FSM pressures instead of Z = 0.
  bool power_law_fsm_pressures = false;
};

struct PressureTerms {
  double z_plus;
  double z_minus;
  double dz_plus;
  double dz_minus;
};

/// Mobility M(h) and the convex/concave pressure split Z+ / Z- for one
/// model family. Immutable after construction.
class PhysicalModel {
 public:
  PhysicalModel(ModelFamily family, ModelParams params) : family_(family), params_(params) {
    if (!(params_.alpha >= 0.0)) throw DomainError("model: alpha must be >= 0");
    if (!(params_.eta > 0.0)) throw DomainError("model: eta must be > 0");
    if (!(params_.a_h >= 0.0)) throw DomainError("model: a_h must be >= 0");
    if (!(params_.lambda >= 0.0)) throw DomainError("model: lambda must be >= 0");
    if (family_ == ModelFamily::PowerLaw && !(params_.mobility_order >= 2.0))
      throw DomainError("model: power-law mobility order must be >= 2");
    const double phi_alpha = phi(params_.alpha);
    cubic_scale_ = 1.0 / (3.0 * phi_alpha);
    slip_scale_ = params_.lambda / (4.0 * phi_alpha);
    integer_order_ = std::floor(params_.mobility_order) == params_.mobility_order;
  }

  static PhysicalModel fsm(double alpha, double eta, double a_h, double lambda = 0.0) {
    return {ModelFamily::FSM, ModelParams{alpha, eta, a_h, lambda, 3.0, false}};
  }

  static PhysicalModel craster_matar(double alpha, double eta, double lambda = 0.0) {
    return {ModelFamily::CM, ModelParams{alpha, eta, 0.0, lambda, 3.0, false}};
  }

  /// M(h) = h^n with Z = 0.
  static PhysicalModel power_law(double n, double alpha = 0.0) {
    return {ModelFamily::PowerLaw, ModelParams{alpha, 1.0, 0.0, 0.0, n, false}};
  }

  ModelFamily family() const noexcept { return family_; }
  const ModelParams& params() const noexcept { return params_; }
  double alpha() const noexcept { return params_.alpha; }

  double mobility(double h) const {
    if (!(h >= 0.0)) throw DomainError("mobility: negative film thickness");
    return mobility_unchecked(h);
  }

  double mobility_derivative(double h) const {
    if (!(h >= 0.0)) throw DomainError("mobility_derivative: negative film thickness");
    return mobility_derivative_unchecked(h);
  }

  /// Analytic formula, also meaningful for h in (-1/alpha, 0).
  double mobility_unchecked(double h) const noexcept {
    if (family_ == ModelFamily::PowerLaw) return power(h, params_.mobility_order);
    const double a = params_.alpha;
    const double h2 = h * h;
    double m = h2 * h * phi_unchecked(a * h) * cubic_scale_;
    if (slip_scale_ != 0.0) {
      const double g = a * h + 2.0;
      m += h2 * g * g * slip_scale_;
    }
    return m;
  }

  double mobility_derivative_unchecked(double h) const noexcept {
    if (family_ == ModelFamily::PowerLaw) {
      const double n = params_.mobility_order;
      return n * power(h, n - 1.0);
    }
    const double a = params_.alpha;
    const double h2 = h * h;
    double dm = (3.0 * h2 * phi_unchecked(a * h) + a * h2 * h * phi_derivative_unchecked(a * h)) * cubic_scale_;
    if (slip_scale_ != 0.0) {
      const double g = a * h + 2.0;
      dm += (2.0 * h * g * g + 2.0 * a * h2 * g) * slip_scale_;
    }
    return dm;
  }

  bool has_z_plus() const noexcept { return uses_fsm_pressures() && family_ != ModelFamily::CM && params_.a_h != 0.0; }
  bool has_z_minus() const noexcept { return uses_fsm_pressures() && params_.alpha != 0.0; }

  /// Z+(h) = -A_H / h^3 (zero for CM and pure power law).
  double z_plus(double h) const noexcept {
    if (!has_z_plus()) return 0.0;
    return -params_.a_h / (h * h * h);
  }

  double dz_plus(double h) const noexcept {
    if (!has_z_plus()) return 0.0;
    const double h2 = h * h;
    return 3.0 * params_.a_h / (h2 * h2);
  }

  /// Z-(h) = alpha / (eta (1 + alpha h)).
  double z_minus(double h) const noexcept {
    if (!has_z_minus()) return 0.0;
    return params_.alpha / (params_.eta * (1.0 + params_.alpha * h));
  }

  double dz_minus(double h) const noexcept {
    if (!has_z_minus()) return 0.0;
    const double d = 1.0 + params_.alpha * h;
    return -params_.alpha * params_.alpha / (params_.eta * d * d);
  }

  /// (Z+(a) - Z+(b)) / (a - b), free of cancellation; equals Z+'(a) at a == b.
  double z_plus_slope(double a, double b) const noexcept {
    if (!has_z_plus()) return 0.0;
    const double a3 = a * a * a;
    const double b3 = b * b * b;
    return params_.a_h * (a * a + a * b + b * b) / (a3 * b3);
  }

  double z_minus_slope(double a, double b) const noexcept {
    if (!has_z_minus()) return 0.0;
    const double al = params_.alpha;
    return -al * al / (params_.eta * (1.0 + al * a) * (1.0 + al * b));
  }

  PressureTerms pressure_terms(double h) const {
    if (!(h > 0.0)) throw DomainError("pressure_terms: film thickness must be positive");
    return {z_plus(h), z_minus(h), dz_plus(h), dz_minus(h)};
  }

  /// sup over h >= 0 of Z-(h)^2.
  double z_minus_square_bound() const noexcept {
    if (!has_z_minus()) return 0.0;
    const double r = params_.alpha / params_.eta;
    return r * r;
  }

 private:
  bool uses_fsm_pressures() const noexcept {
    return family_ != ModelFamily::PowerLaw || params_.power_law_fsm_pressures;
  }

  double power(double h, double n) const noexcept {
    if (integer_order_ || h >= 0.0) return std::pow(h, n);
    return std::copysign(std::pow(-h, n), h);
  }

  ModelFamily family_;
  ModelParams params_;
  double cubic_scale_ = 1.0 / 3.0;
  double slip_scale_ = 0.0;
  bool integer_order_ = true;
};

}  // namespace fiberfilm
