#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fiberfilm/cyclic_banded.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"
#include "fiberfilm/mobility.hpp"
#include "fiberfilm/model.hpp"

namespace fiberfilm {

/// Time treatment of the pressure split.
///   SemiImplicitBEM: Z- at the old level, everything else at the new level.
///   ImplicitGM:      everything at the new level.
enum class TimeScheme { SemiImplicitBEM, ImplicitGM };

inline std::string_view to_string(TimeScheme s) {
  return s == TimeScheme::SemiImplicitBEM ? "bem" : "gm";
}

inline TimeScheme parse_time_scheme(std::string_view s) {
  if (s == "bem" || s == "semi_implicit_bem") return TimeScheme::SemiImplicitBEM;
  if (s == "gm" || s == "implicit_gm") return TimeScheme::ImplicitGM;
  throw ConfigError("unknown scheme '" + std::string(s) + "'");
}

struct SchemeConfig {
  TimeScheme scheme;
  MobilityDiscretization mobility;
  PhysicalModel model;

  /// Semi-implicit time stepping with the integral-mean mobility.
  static SchemeConfig bem(const PhysicalModel& model, int subintervals = 4) {
    MobilityDiscretization m;
    m.variant = MobilityVariant::IntegralMean;
    m.quadrature_subintervals = subintervals;
    return {TimeScheme::SemiImplicitBEM, m, model};
  }

  /// Fully implicit time stepping with the midpoint mobility.
  static SchemeConfig gm(const PhysicalModel& model) {
    MobilityDiscretization m;
    m.variant = MobilityVariant::Midpoint;
    return {TimeScheme::ImplicitGM, m, model};
  }
};

namespace detail {

// Fills F and/or J for the nonlinear step system. Interface k sits between
// nodes k-1 and k and carries the flux m(u_{k-1}, u_k) (1 + p_{k, xbar}).
// Real is the working precision of the residual; model functions and the
// Jacobian are evaluated in double.
template <class Real>
void assemble(const SchemeConfig& cfg, const PeriodicGrid& grid, std::span<const Real> u, std::span<const Real> v,
              double dt, std::vector<Real>* f_out, CyclicBandedMatrix* j_out) {
  const std::size_t n = grid.size();
  if (u.size() != n || v.size() != n) throw std::invalid_argument("residual: field length does not match grid");
  if (!(dt > 0.0)) throw std::invalid_argument("residual: dt must be positive");
  const PhysicalModel& model = cfg.model;
  const bool implicit_z_minus = cfg.scheme == TimeScheme::ImplicitGM;
  const bool needs_positive = model.has_z_plus() || cfg.mobility.variant == MobilityVariant::IntegralMean;
  if (needs_positive) {
    for (std::size_t i = 0; i < n; ++i)
      if (!(u[i] > 0))
        throw PositivityViolation("assembly: nonpositive thickness " + std::to_string(static_cast<double>(u[i])) +
                                      " at node " + std::to_string(i),
                                  i);
  }
  const std::span<const Real> w = implicit_z_minus ? u : v;
  const double dx = grid.dx();
  const Real inv_dx = Real(1) / Real(dx);
  const Real inv_dx2 = inv_dx * inv_dx;
  const double inv_dx3 = static_cast<double>(inv_dx2 * inv_dx);
  const Real alpha = model.alpha();
  auto d = [](Real x) { return static_cast<double>(x); };

  // lap_i = u_{i, xbar x} from exact first differences.
  std::vector<Real> lap(n);
  for (std::size_t i = 0; i < n; ++i)
    lap[i] = ((u[grid.next(i)] - u[i]) - (u[i] - u[grid.prev(i)])) * inv_dx2;

  std::vector<Real> flux(n);
  // dflux[k][q]: derivative of flux k w.r.t. u_{k + q - 2}, q = 0..3.
  std::vector<std::array<double, 4>> dflux(j_out ? n : 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t km = grid.prev(k);
    const Real jump = u[k] - u[km];
    const Real zp = Real(model.z_plus_slope(d(u[k]), d(u[km]))) * jump;
    const Real zm = Real(model.z_minus_slope(d(w[k]), d(w[km]))) * (w[k] - w[km]);
    const Real pgrad = (lap[k] - lap[km] - zp - zm) * inv_dx;
    const MobilityValue mob = evaluate_mobility(model, cfg.mobility, d(u[km]), d(u[k]));
    flux[k] = Real(mob.value) * (1 + pgrad);
    if (j_out) {
      auto& df = dflux[k];
      // Third-difference stencil (u_{k+1} - 3u_k + 3u_{k-1} - u_{k-2}) / dx^3.
      df = {-inv_dx3, 3.0 * inv_dx3, -3.0 * inv_dx3, inv_dx3};
      double dz_k = model.dz_plus(d(u[k]));
      double dz_km = model.dz_plus(d(u[km]));
      if (implicit_z_minus) {
        dz_k += model.dz_minus(d(u[k]));
        dz_km += model.dz_minus(d(u[km]));
      }
      df[2] -= dz_k / dx;
      df[1] += dz_km / dx;
      for (double& c : df) c *= mob.value;
      df[1] += mob.d_first * (1.0 + d(pgrad));
      df[2] += mob.d_second * (1.0 + d(pgrad));
    }
  }

  if (f_out) {
    std::vector<Real>& f = *f_out;
    f.assign(n, Real(0));
    for (std::size_t i = 0; i < n; ++i) {
      const Real coeff = 1 + alpha * (u[i] + v[i]) / 2;
      f[i] = coeff * (u[i] - v[i]) / Real(dt) + (flux[grid.next(i)] - flux[i]) * inv_dx;
    }
  }
  if (j_out) {
    CyclicBandedMatrix& jac = *j_out;
    jac = CyclicBandedMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& out = dflux[grid.next(i)];  // offsets -1..2 relative to i
      const auto& in = dflux[i];              // offsets -2..1 relative to i
      for (int o = -2; o <= 2; ++o) {
        double value = 0.0;
        if (o >= -1) value += out[static_cast<std::size_t>(o + 1)];
        if (o <= 1) value -= in[static_cast<std::size_t>(o + 2)];
        jac.at(i, o) = value / dx;
      }
      const double a = model.alpha();
      jac.at(i, 0) += (1.0 + 0.5 * a * (d(u[i]) + d(v[i]))) / dt + 0.5 * a * (d(u[i]) - d(v[i])) / dt;
    }
  }
}

}  // namespace detail

/// Residual of one time step, F(u_next) with u_prev and dt fixed:
///
///   F_i = (1 + alpha (u_i + v_i) / 2) (u_i - v_i) / dt
///       + [m(u_i, u_{i+1}) (1 + p_{i+1,xbar}) - m(u_{i-1}, u_i) (1 + p_{i,xbar})] / dx
///
/// with p_i = u_{i,xbar x} - Z+(u_i) - Z-(w_i), w = v for the semi-implicit
/// scheme and w = u for the implicit one.
inline Field residual(const SchemeConfig& cfg, const PeriodicGrid& grid, std::span<const double> u_next,
                      std::span<const double> u_prev, double dt) {
  Field f;
  detail::assemble<double>(cfg, grid, u_next, u_prev, dt, &f, nullptr);
  return f;
}

/// Analytic Jacobian dF_i / du_next_j.
inline CyclicBandedMatrix jacobian(const SchemeConfig& cfg, const PeriodicGrid& grid, std::span<const double> u_next,
                                   std::span<const double> u_prev, double dt) {
  CyclicBandedMatrix j(grid.size());
  detail::assemble<double>(cfg, grid, u_next, u_prev, dt, nullptr, &j);
  return j;
}

/// Residual evaluated in extended precision.
inline std::vector<long double> residual_extended(const SchemeConfig& cfg, const PeriodicGrid& grid,
                                                  std::span<const long double> u_next,
                                                  std::span<const long double> u_prev, double dt) {
  std::vector<long double> f;
  detail::assemble<long double>(cfg, grid, u_next, u_prev, dt, &f, nullptr);
  return f;
}

struct StepSystem {
  Field residual;
  CyclicBandedMatrix jacobian;
};

inline StepSystem assemble_system(const SchemeConfig& cfg, const PeriodicGrid& grid, std::span<const double> u_next,
                                  std::span<const double> u_prev, double dt) {
  StepSystem s{Field{}, CyclicBandedMatrix(grid.size())};
  detail::assemble<double>(cfg, grid, u_next, u_prev, dt, &s.residual, &s.jacobian);
  return s;
}

}  // namespace fiberfilm
