#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "fiberfilm/assembly.hpp"
#include "fiberfilm/cyclic_banded.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"

namespace fiberfilm {

struct NewtonConfig {
  int max_iterations = 15;
  double tolerance = 1e-6;  // on ||F||_inf
  double break_factor = 10.0;
  LinearSolverKind linear_solver = LinearSolverKind::Auto;
  // Keep the iterate and residual in long double (Jacobian and linear solve
  // stay in double). Needed for tolerances below the double-precision
  // residual floor, which grows like |u| eps M / dx^4.
  bool extended_precision = false;
};

struct NewtonOutcome {
  bool success = false;
  int iterations = 0;
  double final_residual_norm = std::numeric_limits<double>::infinity();
  std::optional<Field> solution;
  std::string failure_reason;
};

template <class Real>
double norm_inf(std::span<const Real> v) {
  double m = 0.0;
  for (Real x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, static_cast<double>(std::abs(x)));
  }
  return m;
}

inline double norm_inf(const std::vector<double>& v) { return norm_inf(std::span<const double>(v)); }
inline double norm_inf(const std::vector<long double>& v) { return norm_inf(std::span<const long double>(v)); }

namespace detail {

template <class Real>
std::vector<Real> step_residual(const SchemeConfig& scheme, const PeriodicGrid& grid, std::span<const Real> u,
                                std::span<const Real> v, double dt) {
  if constexpr (std::is_same_v<Real, double>)
    return residual(scheme, grid, u, v, dt);
  else
    return residual_extended(scheme, grid, u, v, dt);
}

template <class Real>
NewtonOutcome newton_iterate(const NewtonConfig& config, const SchemeConfig& scheme, const PeriodicGrid& grid,
                             std::span<const double> u_prev, double dt) {
  NewtonOutcome out;
  const std::vector<Real> v(u_prev.begin(), u_prev.end());
  std::vector<Real> u = v;
  Field u_d(u_prev.begin(), u_prev.end());
  Field f_d(u.size());
  const double break_tol = config.tolerance / config.break_factor;
  try {
    std::vector<Real> f = step_residual<Real>(scheme, grid, u, v, dt);
    out.final_residual_norm = norm_inf(f);
    for (int it = 0; it < config.max_iterations; ++it) {
      if (out.final_residual_norm < break_tol) break;
      if (!std::isfinite(out.final_residual_norm)) break;
      for (std::size_t i = 0; i < u.size(); ++i) {
        u_d[i] = static_cast<double>(u[i]);
        f_d[i] = static_cast<double>(f[i]);
      }
      const CyclicBandedMatrix jac = jacobian(scheme, grid, u_d, u_prev, dt);
      const Field delta = solve_linear(jac, f_d, config.linear_solver);
      for (std::size_t i = 0; i < u.size(); ++i) u[i] -= delta[i];
      ++out.iterations;
      f = step_residual<Real>(scheme, grid, u, v, dt);
      out.final_residual_norm = norm_inf(f);
    }
  } catch (const PositivityViolation& e) {
    out.failure_reason = e.what();
    out.final_residual_norm = std::numeric_limits<double>::infinity();
  } catch (const LinearSolveError& e) {
    out.failure_reason = e.what();
    out.final_residual_norm = std::numeric_limits<double>::infinity();
  } catch (const DomainError& e) {
    out.failure_reason = e.what();
    out.final_residual_norm = std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < u.size(); ++i) u_d[i] = static_cast<double>(u[i]);
  out.success = out.final_residual_norm < config.tolerance && all_finite(u_d);
  if (out.success) {
    out.solution = std::move(u_d);
  } else if (out.failure_reason.empty()) {
    out.failure_reason = "residual " + std::to_string(out.final_residual_norm) + " not below tolerance";
  }
  return out;
}

}  // namespace detail

/// Plain Newton iteration for one time step, starting from u_prev.
///
/// Stops early once ||F||_inf < tol / break_factor; succeeds iff the final
/// residual is below tol. Assembly or linear-solve errors end the iteration
/// with success = false rather than propagating.
inline NewtonOutcome newton_solve(const NewtonConfig& config, const SchemeConfig& scheme, const PeriodicGrid& grid,
                                  std::span<const double> u_prev, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("newton_solve: dt must be positive");
  grid.check(u_prev, "newton_solve");
  return config.extended_precision ? detail::newton_iterate<long double>(config, scheme, grid, u_prev, dt)
                                   : detail::newton_iterate<double>(config, scheme, grid, u_prev, dt);
}

}  // namespace fiberfilm
