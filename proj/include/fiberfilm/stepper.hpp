#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fiberfilm/assembly.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"
#include "fiberfilm/newton.hpp"

namespace fiberfilm {

enum class StepMode { Fixed, Adaptive };

inline std::string_view to_string(StepMode m) { return m == StepMode::Fixed ? "fixed" : "adaptive"; }

inline StepMode parse_step_mode(std::string_view s) {
  if (s == "fixed") return StepMode::Fixed;
  if (s == "adaptive") return StepMode::Adaptive;
  throw ConfigError("unknown stepping mode '" + std::string(s) + "'");
}

/// Time-step state for fixed stepping and LTE-driven adaptive stepping.
struct StepController {
  StepMode mode = StepMode::Fixed;
  double dt = 1e-3;
  double dt_old = 0.0;  // previous accepted step; 0 until one exists
  double tol1 = 1e-1;   // LTE tolerance
  int count = 0;
  int count_max = 3;
  int bad = 0;
  double growth_minor = 1.01;
  double growth_major = 1.2;
  double shrink = 0.5;
  int bad_limit = 4;
  // Clamp the step after growth; failure halving is never clamped.
  std::optional<double> dt_min;
  std::optional<double> dt_max;
  // Shorten the last step to land on t_end.
  bool clamp_to_end = false;
  // Stop the run at the first accepted state with a negative node.
  bool stop_at_first_negative = false;

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("stepping: dt must be positive");
    if (count_max < 1) throw ConfigError("stepping: count_max must be >= 1");
    if (!(tol1 > 0.0)) throw ConfigError("stepping: tol1 must be positive");
    if (dt_min && dt_max && *dt_min > *dt_max) throw ConfigError("stepping: dt_min > dt_max");
  }
};

/// One attempted step.
struct StepRecord {
  double t_before = 0.0;
  double dt_used = 0.0;
  int newton_iterations = 0;
  std::optional<double> lte_max;
  bool accepted = false;
  bool growth_event = false;  // the 20% increase fired after this step
  double min_height = 0.0;    // of the accepted state
};

enum class RunStatus { Completed, AbortedNewton, PositivityBreach, StoppedAtNegative };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::AbortedNewton: return "aborted (Newton)";
    case RunStatus::PositivityBreach: return "aborted (positivity breach)";
    case RunStatus::StoppedAtNegative: return "stopped at first negative value";
  }
  return "?";
}

struct RunOutcome {
  Field state;
  double t = 0.0;
  RunStatus status = RunStatus::Completed;
  std::vector<StepRecord> log;
  std::optional<double> first_negative_time;
  double min_height = std::numeric_limits<double>::infinity();
  std::size_t accepted_steps = 0;
  std::size_t newton_failures = 0;
  int growth_events = 0;
  double final_dt = 0.0;
  double wall_seconds = 0.0;

  bool aborted() const { return status == RunStatus::AbortedNewton || status == RunStatus::PositivityBreach; }
};

/// Passed to the observer after every accepted step.
struct AcceptedStep {
  std::size_t index;
  double t;
  double dt_used;
  int newton_iterations;
  std::optional<double> lte_max;
  std::span<const double> state;
};

using StepObserver = std::function<void(const AcceptedStep&)>;

inline double min_value(std::span<const double> u) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : u) m = std::min(m, x);
  return m;
}

/// Dimensionless local truncation error
///   LTE_i = | e^{k+1}_i - (dt / dt_old) e^k_i |,
///   e^{k+1}_i = (u^{k+1}_i - u^k_i) / u^k_i,  e^k_i = (u^k_i - u^{k-1}_i) / u^{k-1}_i.
inline Field lte(std::span<const double> u_next, std::span<const double> u_curr, std::span<const double> u_prev,
                 double dt, double dt_old) {
  if (u_next.size() != u_curr.size() || u_curr.size() != u_prev.size())
    throw std::invalid_argument("lte: field length mismatch");
  if (!(dt > 0.0) || !(dt_old > 0.0)) throw std::invalid_argument("lte: steps must be positive");
  Field out(u_next.size());
  const double ratio = dt / dt_old;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (u_curr[i] == 0.0 || u_prev[i] == 0.0) throw PositivityViolation("lte: zero denominator", i);
    const double e_new = (u_next[i] - u_curr[i]) / u_curr[i];
    const double e_old = (u_curr[i] - u_prev[i]) / u_prev[i];
    out[i] = std::abs(e_new - ratio * e_old);
  }
  return out;
}

/// Runs fixed or adaptive time stepping from t_start until t >= t_end.
///
/// On a Newton failure dt is halved and the step retried; more than
/// bad_limit consecutive failures abort the run. In adaptive mode every
/// accepted step grows dt by growth_minor, and every count_max-th step whose
/// LTE is below tol1 grows it by growth_major. The first accepted step has no
/// u^{k-1} and skips the LTE logic.
inline RunOutcome integrate(StepController ctrl, const SchemeConfig& scheme, const NewtonConfig& newton,
                            const PeriodicGrid& grid, Field initial, double t_start, double t_end,
                            const StepObserver& observer = {}) {
  ctrl.validate();
  grid.check(initial, "integrate");
  const auto wall_start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.state = std::move(initial);
  out.t = t_start;
  out.min_height = min_value(out.state);
  Field previous;  // u^{k-1}
  bool have_previous = false;
  const bool bem = scheme.scheme == TimeScheme::SemiImplicitBEM;

  if (out.min_height < 0.0) out.first_negative_time = t_start;

  while (t_end - out.t > 1e-9 * ctrl.dt) {
    double dt_step = ctrl.dt;
    bool clamped = false;
    if (ctrl.clamp_to_end && out.t + dt_step > t_end) {
      dt_step = t_end - out.t;
      clamped = true;
    }
    StepRecord rec;
    rec.t_before = out.t;
    rec.dt_used = dt_step;
    NewtonOutcome res = newton_solve(newton, scheme, grid, out.state, dt_step);
    rec.newton_iterations = res.iterations;

    if (!res.success) {
      ++out.newton_failures;
      rec.accepted = false;
      out.log.push_back(rec);
      ++ctrl.bad;
      ctrl.dt *= ctrl.shrink;
      if (ctrl.bad > ctrl.bad_limit) {
        out.status = RunStatus::AbortedNewton;
        break;
      }
      continue;
    }

    Field next = std::move(*res.solution);
    out.t = clamped ? t_end : out.t + dt_step;
    ctrl.bad = 0;
    rec.accepted = true;
    rec.min_height = min_value(next);

    if (ctrl.mode == StepMode::Adaptive) {
      ctrl.dt *= ctrl.growth_minor;
      if (have_previous && ctrl.dt_old > 0.0) {
        try {
          const Field err = lte(next, out.state, previous, dt_step, ctrl.dt_old);
          rec.lte_max = norm_inf(err);
        } catch (const PositivityViolation&) {
          rec.lte_max.reset();
        }
        if (rec.lte_max && *rec.lte_max < ctrl.tol1) {
          if (++ctrl.count == ctrl.count_max) {
            ctrl.dt *= ctrl.growth_major;
            ctrl.count = 0;
            rec.growth_event = true;
            ++out.growth_events;
          }
        }
      }
      if (ctrl.dt_max) ctrl.dt = std::min(ctrl.dt, *ctrl.dt_max);
      if (ctrl.dt_min) ctrl.dt = std::max(ctrl.dt, *ctrl.dt_min);
    }
    ctrl.dt_old = dt_step;

    previous = std::move(out.state);
    have_previous = true;
    out.state = std::move(next);
    ++out.accepted_steps;
    out.log.push_back(rec);
    out.min_height = std::min(out.min_height, rec.min_height);

    if (observer) observer(AcceptedStep{out.accepted_steps, out.t, dt_step, rec.newton_iterations, rec.lte_max, out.state});

    if (rec.min_height <= 0.0) {
      if (bem) {
        out.status = RunStatus::PositivityBreach;
        break;
      }
      if (rec.min_height < 0.0 && !out.first_negative_time) {
        out.first_negative_time = out.t;
        if (ctrl.stop_at_first_negative) {
          out.status = RunStatus::StoppedAtNegative;
          break;
        }
      }
    }
  }
  out.final_dt = ctrl.dt;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return out;
}

inline RunOutcome step_fixed(StepController ctrl, const SchemeConfig& scheme, const NewtonConfig& newton,
                             const PeriodicGrid& grid, Field initial, double t_end, const StepObserver& observer = {}) {
  ctrl.mode = StepMode::Fixed;
  return integrate(ctrl, scheme, newton, grid, std::move(initial), 0.0, t_end, observer);
}

inline RunOutcome step_adaptive(StepController ctrl, const SchemeConfig& scheme, const NewtonConfig& newton,
                                const PeriodicGrid& grid, Field initial, double t_end,
                                const StepObserver& observer = {}) {
  ctrl.mode = StepMode::Adaptive;
  return integrate(ctrl, scheme, newton, grid, std::move(initial), 0.0, t_end, observer);
}

}  // namespace fiberfilm
