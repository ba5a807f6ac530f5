#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiberfilm/assembly.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"
#include "fiberfilm/model.hpp"
#include "fiberfilm/newton.hpp"
#include "fiberfilm/stepper.hpp"

namespace fiberfilm {

/// sum_i (u_i + alpha/2 u_i^2) dx
inline double mass(const PeriodicGrid& grid, std::span<const double> u, double alpha) {
  grid.check(u, "mass");
  double acc = 0.0;
  for (double v : u) acc += v + 0.5 * alpha * v * v;
  return acc * grid.dx();
}

/// Base points of the entropy G(h) = int_B^h (1 + alpha v) int_A^v ds / M(s) dv.
struct EntropySpec {
  double base_point_a = 1.0;
  double outer_base_b = 1.0;
  double tolerance = 1e-10;

  void validate() const {
    if (!(base_point_a > 0.0) || !(outer_base_b > 0.0))
      throw std::invalid_argument("EntropySpec: base points must be positive");
  }
};

namespace detail {

// H(x) = int_A^x (Q(x) - Q(s)) / M(s) ds with Q(s) = s + alpha s^2 / 2, so that
// H'(x) = (1 + alpha x) int_A^x ds / M(s) and G(h) = H(h) - H(B). Integrated in
// sigma = ln(s / x), where x - s = -x expm1(sigma) keeps full relative
// accuracy next to the upper limit.
inline double entropy_primitive(const PhysicalModel& model, double base_a, double x, double tol) {
  if (x == base_a) return 0.0;
  const double alpha = model.alpha();
  auto integrand = [&](double sigma) {
    const double s = x * std::exp(sigma);
    const double dq = -x * std::expm1(sigma) * (1.0 + 0.5 * alpha * (x + s));
    return dq * s / model.mobility_unchecked(s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, std::log(base_a / x), 0.0, 12,
                                                                       tol);
}

}  // namespace detail

/// Entropy density G(h) by adaptive quadrature.
inline double entropy_value(const PhysicalModel& model, const EntropySpec& spec, double h) {
  spec.validate();
  if (!(h > 0.0)) throw PositivityViolation("entropy_value: film thickness must be positive");
  return detail::entropy_primitive(model, spec.base_point_a, h, spec.tolerance) -
         detail::entropy_primitive(model, spec.base_point_a, spec.outer_base_b, spec.tolerance);
}

/// sum_i G(u_i) dx
inline double entropy_sum(const PeriodicGrid& grid, const PhysicalModel& model, const EntropySpec& spec,
                          std::span<const double> u) {
  grid.check(u, "entropy_sum");
  spec.validate();
  const double offset = detail::entropy_primitive(model, spec.base_point_a, spec.outer_base_b, spec.tolerance);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0)) throw PositivityViolation("entropy_sum: nonpositive thickness", i);
    acc += detail::entropy_primitive(model, spec.base_point_a, u[i], spec.tolerance) - offset;
  }
  return acc * grid.dx();
}

/// sum_i (Z-(u_i) / 2)^2 dx, the entropy production bound rate.
inline double entropy_source_rate(const PeriodicGrid& grid, const PhysicalModel& model, std::span<const double> u) {
  double acc = 0.0;
  for (double v : u) {
    const double z = 0.5 * model.z_minus(v);
    acc += z * z;
  }
  return acc * grid.dx();
}

/// max_i |u_{i+1} - u_i| / dx
inline double lipschitz_estimate(const PeriodicGrid& grid, std::span<const double> u) {
  grid.check(u, "lipschitz_estimate");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[grid.next(i)] - u[i]));
  return m / grid.dx();
}

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  std::optional<double> entropy;  // computed at the entropy stride only
  double entropy_bound = 0.0;     // sum G(u(0)) dx + int_0^t sum (Z-/2)^2 dx
  double min_height = 0.0;
  double lipschitz = 0.0;
  double dt = 0.0;
  int newton_iters = 0;
};

/// Accumulates diagnostics along a run. Feed it the initial state, then every
/// accepted step (see StepObserver). The entropy bound's time integral uses
/// the trapezoid rule over accepted steps.
class DiagnosticsRecorder {
 public:
  DiagnosticsRecorder(const PeriodicGrid& grid, const PhysicalModel& model, EntropySpec spec = {},
                      std::size_t entropy_stride = 1, bool track_entropy = true)
      : grid_(grid), model_(model), spec_(spec), stride_(std::max<std::size_t>(entropy_stride, 1)),
        track_entropy_(track_entropy) {}

  void start(double t0, std::span<const double> u0) {
    records_.clear();
    DiagnosticsRecord r = snapshot(t0, u0, 0.0, 0);
    if (track_entropy_ && r.min_height > 0.0) {
      initial_entropy_ = entropy_sum(grid_, model_, spec_, u0);
      r.entropy = initial_entropy_;
    } else {
      track_entropy_ = false;
    }
    accumulated_ = 0.0;
    last_rate_ = entropy_source_rate(grid_, model_, u0);
    r.entropy_bound = initial_entropy_;
    records_.push_back(r);
  }

  void observe(const AcceptedStep& step) {
    const double rate = entropy_source_rate(grid_, model_, step.state);
    accumulated_ += 0.5 * (rate + last_rate_) * step.dt_used;
    last_rate_ = rate;
    DiagnosticsRecord r = snapshot(step.t, step.state, step.dt_used, step.newton_iterations);
    r.entropy_bound = initial_entropy_ + accumulated_;
    if (track_entropy_ && step.index % stride_ == 0 && r.min_height > 0.0)
      r.entropy = entropy_sum(grid_, model_, spec_, step.state);
    records_.push_back(r);
  }

  StepObserver observer() {
    return [this](const AcceptedStep& s) { observe(s); };
  }

  const std::vector<DiagnosticsRecord>& records() const { return records_; }

  /// Smallest (bound - entropy) over records where entropy was computed.
  double min_entropy_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : records_)
      if (r.entropy) m = std::min(m, r.entropy_bound - *r.entropy);
    return m;
  }

 private:
  DiagnosticsRecord snapshot(double t, std::span<const double> u, double dt, int iters) const {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = mass(grid_, u, model_.alpha());
    r.min_height = min_value(u);
    r.lipschitz = lipschitz_estimate(grid_, u);
    r.dt = dt;
    r.newton_iters = iters;
    return r;
  }

  PeriodicGrid grid_;
  PhysicalModel model_;
  EntropySpec spec_;
  std::size_t stride_;
  bool track_entropy_;
  double initial_entropy_ = 0.0;
  double accumulated_ = 0.0;
  double last_rate_ = 0.0;
  std::vector<DiagnosticsRecord> records_;
};

struct EntropyReport {
  std::vector<double> entropy;
  std::vector<double> bound;
  double min_slack = std::numeric_limits<double>::infinity();  // min(bound - entropy)
  std::size_t violations = 0;

  bool satisfied() const { return violations == 0; }
};

/// Checks sum G(u(t)) dx <= sum G(u(0)) dx + int_0^t sum (Z-/2)^2 dx on a
/// stored history. Violations are counted beyond tolerance * |bound|.
inline EntropyReport entropy_estimate_check(std::span<const double> times, std::span<const Field> history,
                                            const PhysicalModel& model, const EntropySpec& spec,
                                            const PeriodicGrid& grid, double tolerance = 1e-6) {
  if (times.size() != history.size() || history.empty())
    throw std::invalid_argument("entropy_estimate_check: need matching, nonempty times and states");
  EntropyReport rep;
  const double g0 = entropy_sum(grid, model, spec, history[0]);
  double integral = 0.0;
  double last_rate = entropy_source_rate(grid, model, history[0]);
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (k > 0) {
      const double rate = entropy_source_rate(grid, model, history[k]);
      integral += 0.5 * (rate + last_rate) * (times[k] - times[k - 1]);
      last_rate = rate;
    }
    const double e = entropy_sum(grid, model, spec, history[k]);
    const double b = g0 + integral;
    rep.entropy.push_back(e);
    rep.bound.push_back(b);
    rep.min_slack = std::min(rep.min_slack, b - e);
    if (b - e < -tolerance * std::abs(b)) ++rep.violations;
  }
  return rep;
}

/// Average l2 error exactly as (1/L) sum_i (u_i - u*_i)^2. There is no dx
/// weight and no square root.
inline double l2_error(std::span<const double> u_coarse, std::span<const double> u_fine_restricted, double length) {
  if (u_coarse.size() != u_fine_restricted.size()) throw std::invalid_argument("l2_error: length mismatch");
  if (!(length > 0.0)) throw std::invalid_argument("l2_error: length must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < u_coarse.size(); ++i) {
    const double d = u_coarse[i] - u_fine_restricted[i];
    acc += d * d;
  }
  return acc / length;
}

/// Conventional discrete L2 norm sqrt(sum_i (a_i - b_i)^2 dx).
inline double l2_norm_difference(const PeriodicGrid& grid, std::span<const double> a, std::span<const double> b) {
  grid.check(a, "l2_norm_difference");
  grid.check(b, "l2_norm_difference");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc * grid.dx());
}

/// Samples at even indices of a field on a grid twice as fine.
inline Field restrict_fine_to_coarse(std::span<const double> fine, std::size_t coarse_size) {
  if (coarse_size == 0 || fine.size() != 2 * coarse_size)
    throw std::invalid_argument("restrict_fine_to_coarse: fine grid must be exactly twice the coarse grid");
  Field out(coarse_size);
  for (std::size_t i = 0; i < coarse_size; ++i) out[i] = fine[2 * i];
  return out;
}

inline Field restrict_fine_to_coarse(std::span<const double> fine) {
  if (fine.size() % 2 != 0) throw std::invalid_argument("restrict_fine_to_coarse: fine length must be even");
  return restrict_fine_to_coarse(fine, fine.size() / 2);
}

struct ConvergenceReport {
  std::vector<std::size_t> points;
  std::vector<double> difference_norms;  // ||u_N - R u_2N|| for successive pairs
  std::vector<double> orders;            // log2 of successive norm ratios
  double observed_order = std::numeric_limits<double>::quiet_NaN();
  bool unstable = false;
  std::string note;
};

/// Self-convergence study on a 2:1 ladder of grids using fixed steps.
///
/// initial(grid) supplies the initial state on each grid. The study is
/// flagged unstable when any run aborts or loses positivity, or when the
/// observed orders are not finite, outside [0.5, 4], or disagree by more
/// than 0.5 between successive pairs.
inline ConvergenceReport convergence_order(const SchemeConfig& scheme, const NewtonConfig& newton, double length,
                                           std::span<const std::size_t> ladder,
                                           const std::function<Field(const PeriodicGrid&)>& initial, double dt,
                                           double t_check) {
  if (ladder.size() < 3) throw std::invalid_argument("convergence_order: need at least three grids");
  for (std::size_t k = 1; k < ladder.size(); ++k)
    if (ladder[k] != 2 * ladder[k - 1])
      throw std::invalid_argument("convergence_order: grids must refine 2:1 in increasing order");

  ConvergenceReport rep;
  std::vector<Field> finals;
  StepController ctrl;
  ctrl.mode = StepMode::Fixed;
  ctrl.dt = dt;
  ctrl.clamp_to_end = true;
  for (std::size_t n : ladder) {
    const PeriodicGrid grid(n, length);
    RunOutcome run = integrate(ctrl, scheme, newton, grid, initial(grid), 0.0, t_check);
    rep.points.push_back(n);
    if (run.status != RunStatus::Completed || run.min_height <= 0.0) {
      rep.unstable = true;
      rep.note = "run on N=" + std::to_string(n) + " did not complete with a positive state";
    }
    finals.push_back(std::move(run.state));
  }
  for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
    const PeriodicGrid coarse(ladder[k], length);
    const Field restricted = restrict_fine_to_coarse(finals[k + 1], ladder[k]);
    rep.difference_norms.push_back(l2_norm_difference(coarse, finals[k], restricted));
  }
  for (std::size_t k = 0; k + 1 < rep.difference_norms.size(); ++k)
    rep.orders.push_back(std::log2(rep.difference_norms[k] / rep.difference_norms[k + 1]));
  rep.observed_order = rep.orders.back();
  for (double p : rep.orders) {
    if (!std::isfinite(p) || p < 0.5 || p > 4.0) {
      rep.unstable = true;
      if (rep.note.empty()) rep.note = "order estimate outside [0.5, 4]";
    }
  }
  for (std::size_t k = 1; k < rep.orders.size(); ++k) {
    if (std::abs(rep.orders[k] - rep.orders[k - 1]) > 0.5) {
      rep.unstable = true;
      if (rep.note.empty()) rep.note = "order estimates disagree between refinements";
    }
  }
  return rep;
}

/// True if some Lipschitz estimate exceeds factor times the running median
/// of all earlier estimates.
inline bool lipschitz_blows_up(std::span<const DiagnosticsRecord> records, double factor = 10.0) {
  std::vector<double> seen;
  for (const auto& r : records) {
    if (!seen.empty()) {
      std::vector<double> tmp = seen;
      auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
      std::nth_element(tmp.begin(), mid, tmp.end());
      if (r.lipschitz > factor * *mid) return true;
    }
    seen.push_back(r.lipschitz);
  }
  return false;
}

}  // namespace fiberfilm
