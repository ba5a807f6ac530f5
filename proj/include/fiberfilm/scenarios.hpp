#pragma once

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fiberfilm/assembly.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"
#include "fiberfilm/io.hpp"
#include "fiberfilm/model.hpp"
#include "fiberfilm/newton.hpp"
#include "fiberfilm/stepper.hpp"

namespace fiberfilm {

/// h0(x_i) = hbar (1 + amplitude sin(pi x_i / L)).
inline Field ic_perturbed_flat(const PeriodicGrid& grid, double hbar, double amplitude = 0.01) {
  if (!(hbar > 0.0)) throw std::invalid_argument("ic_perturbed_flat: hbar must be positive");
  if (!(std::abs(amplitude) < 1.0)) throw std::invalid_argument("ic_perturbed_flat: |amplitude| must be < 1");
  Field h(grid.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = hbar * (1.0 + amplitude * std::sin(std::numbers::pi * grid.x(i) / grid.length()));
  return h;
}

struct ProfileOptions {
  double crop_tolerance = 0.01;  // relative endpoint mismatch allowed when cropping
  std::size_t window = 5;        // moving-average window (odd)
  std::size_t modes = 0;         // Fourier modes; 0 selects min(N/4, 64)
  std::size_t min_samples = 8;   // smallest acceptable crop window
};

namespace detail {

// Longest window [first, last] whose end heights agree within tol.
inline std::pair<std::size_t, std::size_t> crop_window(std::span<const double> h, double tol, std::size_t min_len) {
  const std::size_t n = h.size();
  for (std::size_t len = n; len >= std::max<std::size_t>(min_len, 2); --len) {
    for (std::size_t a = 0; a + len <= n; ++a) {
      const std::size_t b = a + len - 1;
      if (std::abs(h[b] - h[a]) <= tol * std::max(h[a], h[b])) return {a, b};
    }
  }
  throw std::invalid_argument("load_profile: no crop window with matching endpoint heights");
}

// Periodic moving average.
inline Field moving_average(std::span<const double> h, std::size_t window) {
  const std::size_t n = h.size();
  if (window <= 1) return Field(h.begin(), h.end());
  const long long half = static_cast<long long>(window / 2);
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long long k = -half; k <= half; ++k) {
      long long j = (static_cast<long long>(i) + k) % static_cast<long long>(n);
      if (j < 0) j += static_cast<long long>(n);
      acc += h[static_cast<std::size_t>(j)];
    }
    out[i] = acc / static_cast<double>(2 * half + 1);
  }
  return out;
}

}  // namespace detail

/// Builds a smooth periodic initial condition from measured (x, h) samples:
/// crop to the longest window with matching end heights, smooth with a
/// periodic moving average, then least-squares fit a truncated Fourier series
/// on the cropped period and evaluate it on the grid nodes. The cropped
/// period is mapped linearly onto [0, L).
inline Field load_profile(std::span<const double> xs, std::span<const double> hs, const PeriodicGrid& grid,
                          const ProfileOptions& opt = {}) {
  if (xs.size() != hs.size()) throw std::invalid_argument("load_profile: x and h lengths differ");
  if (xs.size() < opt.min_samples) throw std::invalid_argument("load_profile: too few samples");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("load_profile: x must be strictly increasing");
  for (double h : hs)
    if (!(h > 0.0)) throw std::invalid_argument("load_profile: heights must be positive");
  if (opt.window % 2 == 0) throw std::invalid_argument("load_profile: moving-average window must be odd");

  const auto [a, b] = detail::crop_window(hs, opt.crop_tolerance, opt.min_samples);
  const double x0 = xs[a];
  const double period = xs[b] - x0;
  // The last sample duplicates the first one periodically.
  const std::span<const double> window_x = xs.subspan(a, b - a);
  const Field smooth = detail::moving_average(hs.subspan(a, b - a), opt.window);
  const std::size_t m = smooth.size();

  std::size_t modes = opt.modes ? opt.modes : std::min<std::size_t>(grid.size() / 4, 64);
  modes = std::min(modes, (m - 1) / 2);
  const std::size_t cols = 2 * modes + 1;

  // Column-major least-squares system.
  std::vector<double> basis(m * cols);
  std::vector<double> rhs(smooth.begin(), smooth.end());
  for (std::size_t r = 0; r < m; ++r) {
    const double theta = 2.0 * std::numbers::pi * (window_x[r] - x0) / period;
    basis[r] = 1.0;
    for (std::size_t k = 1; k <= modes; ++k) {
      basis[(2 * k - 1) * m + r] = std::cos(static_cast<double>(k) * theta);
      basis[(2 * k) * m + r] = std::sin(static_cast<double>(k) * theta);
    }
  }
  const lapack_int info =
      LAPACKE_dgels(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(m), static_cast<lapack_int>(cols), 1,
                    basis.data(), static_cast<lapack_int>(m), rhs.data(), static_cast<lapack_int>(m));
  if (info != 0) throw std::runtime_error("load_profile: least-squares fit failed");

  Field out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double theta = 2.0 * std::numbers::pi * grid.x(i) / grid.length();
    double v = rhs[0];
    for (std::size_t k = 1; k <= modes; ++k)
      v += rhs[2 * k - 1] * std::cos(static_cast<double>(k) * theta) +
           rhs[2 * k] * std::sin(static_cast<double>(k) * theta);
    if (!(v > 0.0)) throw std::invalid_argument("load_profile: fitted profile is not positive");
    out[i] = v;
  }
  return out;
}

inline Field load_profile(const std::filesystem::path& path, const PeriodicGrid& grid, const ProfileOptions& opt = {}) {
  const auto [xs, hs] = read_xy_csv(path);
  return load_profile(xs, hs, grid, opt);
}

/// Physical units per dimensionless unit.
struct DimensionalScaling {
  double length_scale = 1.0;  // axial, e.g. mm
  double height_scale = 1.0;  // radial, e.g. mm
  double time_scale = 1.0;    // s

  void validate() const {
    if (!(length_scale > 0.0) || !(height_scale > 0.0) || !(time_scale > 0.0))
      throw std::invalid_argument("DimensionalScaling: scales must be positive");
  }
};

inline Snapshot dimensionalize(Snapshot s, const DimensionalScaling& sc) {
  sc.validate();
  s.t *= sc.time_scale;
  for (double& x : s.x) x *= sc.length_scale;
  for (double& h : s.h) h *= sc.height_scale;
  return s;
}

inline Snapshot nondimensionalize(Snapshot s, const DimensionalScaling& sc) {
  sc.validate();
  s.t /= sc.time_scale;
  for (double& x : s.x) x /= sc.length_scale;
  for (double& h : s.h) h /= sc.height_scale;
  return s;
}

inline std::vector<Snapshot> dimensionalize(std::vector<Snapshot> series, const DimensionalScaling& sc) {
  for (auto& s : series) s = dimensionalize(std::move(s), sc);
  return series;
}

struct InitialCondition {
  double hbar = 1.0;
  double amplitude = 0.01;
  std::optional<std::filesystem::path> profile;   // measured (x, h) samples to fit
  std::optional<std::filesystem::path> snapshot;  // exact state on the scenario grid
  ProfileOptions profile_options;
};

struct Scenario {
  Scenario(std::string name_, std::string description_, const PhysicalModel& model_, const PeriodicGrid& grid_)
      : name(std::move(name_)), description(std::move(description_)), model(model_), grid(grid_),
        scheme(SchemeConfig::bem(model_)) {}

  std::string name;
  std::string description;
  PhysicalModel model;
  PeriodicGrid grid;
  InitialCondition initial;
  SchemeConfig scheme;
  StepController stepping;
  NewtonConfig newton;
  double t_start = 0.0;
  double t_end = 1.0;
  std::map<TimeScheme, double> t_end_by_scheme;  // overrides t_end when present
  std::size_t snapshot_every = 0;                 // accepted steps; 0 disables
  double snapshot_interval = 0.0;                 // simulated time; 0 disables
  std::size_t entropy_stride = 1;
  int subintervals = 4;
  bool requires_initial_file = false;  // no built-in initial state
  std::map<std::string, std::string> metadata;

  double horizon() const {
    const auto it = t_end_by_scheme.find(scheme.scheme);
    return it == t_end_by_scheme.end() ? t_end : it->second;
  }

  /// Switches between the semi-implicit (integral-mean) and implicit
  /// (midpoint) schemes, keeping the model.
  void set_scheme(TimeScheme s) {
    scheme = s == TimeScheme::SemiImplicitBEM ? SchemeConfig::bem(model, subintervals) : SchemeConfig::gm(model);
  }

  Field initial_state() const {
    Field h;
    if (requires_initial_file && !initial.snapshot && !initial.profile)
      throw ConfigError("scenario '" + name + "' needs initial.snapshot or initial.profile");
    if (initial.snapshot) {
      const Snapshot snap = read_snapshot(*initial.snapshot);
      if (snap.h.size() != grid.size())
        throw ConfigError("snapshot " + initial.snapshot->string() + " has " + std::to_string(snap.h.size()) +
                          " points, grid has " + std::to_string(grid.size()));
      h = snap.h;
    } else if (initial.profile) {
      h = load_profile(*initial.profile, grid, initial.profile_options);
    } else {
      h = ic_perturbed_flat(grid, initial.hbar, initial.amplitude);
    }
    for (std::size_t i = 0; i < h.size(); ++i)
      if (!(h[i] > 0.0)) throw PositivityViolation("initial condition is not strictly positive", i);
    return h;
  }
};

namespace detail {

inline Scenario make_scenario(std::string name, std::string description, const PhysicalModel& model,
                              std::size_t points, double length, double hbar, TimeScheme scheme) {
  Scenario s(std::move(name), std::move(description), model, PeriodicGrid(points, length));
  s.initial.hbar = hbar;
  s.set_scheme(scheme);
  return s;
}

}  // namespace detail

inline const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"coarse_comparison", "coarse_comparison_spinup", "rayleigh_plateau",
                                                 "isolated_droplet",  "adaptive_smooth",          "adaptive_singular",
                                                 "cpu_benchmark"};
  return names;
}

/// One row of the CPU benchmark: hbar = 0.45 on [0, 1] with dx in
/// {0.01, 0.005, 0.0025}. Fixed runs use dt = 1e-3; adaptive runs start at
/// dt = 1e-3 with tol1 = 1e-3. The horizon is the time at which the implicit
/// scheme first goes negative on that grid.
inline Scenario cpu_benchmark_case(double dx, TimeScheme scheme, StepMode mode) {
  const PhysicalModel model = PhysicalModel::fsm(5.0, 0.005, 0.0);
  const auto points = static_cast<std::size_t>(std::llround(1.0 / dx));
  if (points < PeriodicGrid::kMinPoints || std::abs(static_cast<double>(points) * dx - 1.0) > 1e-9)
    throw ConfigError("cpu_benchmark: dx must divide 1");
  Scenario s = detail::make_scenario("cpu_benchmark", "positivity and cost benchmark", model, points, 1.0, 0.45,
                                     scheme);
  s.stepping.mode = mode;
  s.stepping.dt = 1e-3;
  s.stepping.tol1 = 1e-3;
  s.stepping.count_max = 3;
  s.newton.tolerance = 1e-3;
  if (points == 100) s.t_end = 0.299;
  else if (points == 200) s.t_end = 1.09594;
  else if (points == 400) s.t_end = 3.4765;
  else s.t_end = 1.0;
  s.metadata["dx"] = format_double(dx);
  return s;
}

/// Parameter sets of the shipped experiments.
inline Scenario builtin_scenario(std::string_view name) {
  if (name == "adaptive_smooth") {
    Scenario s = detail::make_scenario("adaptive_smooth", "adaptive stepping, stable coating flow",
                                       PhysicalModel::fsm(5.0, 0.02, 1e-5), 100, 1.0, 0.95,
                                       TimeScheme::SemiImplicitBEM);
    s.stepping.mode = StepMode::Adaptive;
    s.stepping.dt = 1e-3;
    s.stepping.tol1 = 1e-1;
    s.stepping.count_max = 3;
    s.newton.tolerance = 1e-1;
    s.t_end = 1.0;
    return s;
  }
  if (name == "adaptive_singular") {
    Scenario s = detail::make_scenario("adaptive_singular", "adaptive stepping through near-singular droplet dynamics",
                                       PhysicalModel::fsm(5.0, 0.005, 0.0), 100, 1.0, 0.95,
                                       TimeScheme::SemiImplicitBEM);
    s.stepping.mode = StepMode::Adaptive;
    s.stepping.dt = 1e-3;
    s.stepping.tol1 = 1e-1;
    s.stepping.count_max = 3;
    s.newton.tolerance = 1e-1;
    s.t_end = 1.0;
    return s;
  }
  if (name == "cpu_benchmark") return cpu_benchmark_case(0.01, TimeScheme::SemiImplicitBEM, StepMode::Fixed);
  if (name == "coarse_comparison") {
    Scenario s = detail::make_scenario("coarse_comparison", "coarse-grid scheme comparison from a spun-up state",
                                       PhysicalModel::fsm(10.6, 0.223227, 0.001), 3072, 24.0, 1.471,
                                       TimeScheme::SemiImplicitBEM);
    s.stepping.mode = StepMode::Fixed;
    s.stepping.dt = 0.1;
    s.t_start = 610.0;
    s.t_end = 655.0;
    s.newton.tolerance = 1e-6;
    s.requires_initial_file = true;
    s.metadata["initial_state"] = "snapshot at t = 610 restricted from the spin-up run (set initial.snapshot)";
    return s;
  }
  if (name == "coarse_comparison_spinup") {
    Scenario s = detail::make_scenario("coarse_comparison_spinup", "fine-grid implicit spin-up to t = 610",
                                       PhysicalModel::fsm(10.6, 0.223227, 0.001), 6144, 24.0, 1.471,
                                       TimeScheme::ImplicitGM);
    s.stepping.mode = StepMode::Fixed;
    s.stepping.dt = 1e-4;
    s.t_end = 610.0;
    s.newton.tolerance = 1e-6;
    s.metadata["note"] = "about 6.1e6 steps; restrict the final snapshot to 3072 points for coarse_comparison";
    return s;
  }
  if (name == "rayleigh_plateau") {
    Scenario s = detail::make_scenario("rayleigh_plateau", "Rayleigh-Plateau regime (traveling beads)",
                                       PhysicalModel::fsm(5.8856, 0.2912, 1e-11), 1000, 5.0, 0.9568,
                                       TimeScheme::SemiImplicitBEM);
    s.stepping.mode = StepMode::Adaptive;
    s.stepping.dt = 1e-3;
    s.stepping.tol1 = 1e-1;
    s.stepping.dt_min = 1e-3;
    s.stepping.dt_max = 1e-2;
    s.newton.tolerance = 1e-6;
    s.t_end = 250.006;
    s.metadata["flow_rate_g_per_s"] = "0.08";
    return s;
  }
  if (name == "isolated_droplet") {
    Scenario s = detail::make_scenario("isolated_droplet", "isolated droplet regime from a measured profile",
                                       PhysicalModel::fsm(3.092621559, 0.123, 4.0e-2), 1999, 39.338, 1.0,
                                       TimeScheme::SemiImplicitBEM);
    s.stepping.mode = StepMode::Adaptive;
    s.stepping.dt = 1e-3;
    s.stepping.tol1 = 1e-1;
    s.stepping.dt_min = 1e-3;
    s.stepping.dt_max = 1e-2;
    s.newton.tolerance = 1e-6;
    s.t_end = 827.807;
    s.t_end_by_scheme[TimeScheme::SemiImplicitBEM] = 827.807;
    s.t_end_by_scheme[TimeScheme::ImplicitGM] = 807.107;
    s.metadata["flow_rate_text_g_per_s"] = "0.006";
    s.metadata["flow_rate_caption_g_per_s"] = "0.06";
    s.requires_initial_file = true;
    s.metadata["initial_state"] = "measured profile required (set initial.profile)";
    return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

}  // namespace fiberfilm
