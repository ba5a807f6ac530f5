#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiberfilm/errors.hpp"
#include "fiberfilm/model.hpp"

namespace fiberfilm {

/// Film thickness samples, one per grid node.
using Field = std::vector<double>;

/// Uniform periodic grid on [0, L) with nodes x_i = i * dx, i = 0..N-1.
/// The node x = L is identified with x = 0.
class PeriodicGrid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  PeriodicGrid(std::size_t n_points, double length) : n_(n_points), length_(length) {
    if (n_ < kMinPoints) throw std::invalid_argument("PeriodicGrid: need at least 8 points");
    if (!(length_ > 0.0)) throw std::invalid_argument("PeriodicGrid: length must be positive");
    dx_ = length_ / static_cast<double>(n_);
  }

  std::size_t size() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return dx_; }
  double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }

  std::size_t next(std::size_t i) const noexcept { return i + 1 == n_ ? 0 : i + 1; }
  std::size_t prev(std::size_t i) const noexcept { return i == 0 ? n_ - 1 : i - 1; }
  /// (i + offset) mod N for small signed offsets.
  std::size_t wrap(std::size_t i, int offset) const noexcept {
    const auto n = static_cast<long long>(n_);
    long long j = (static_cast<long long>(i) + offset) % n;
    if (j < 0) j += n;
    return static_cast<std::size_t>(j);
  }

  Field nodes() const {
    Field xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  void check(std::span<const double> f, const char* who) const {
    if (f.size() != n_)
      throw std::invalid_argument(std::string(who) + ": field length " + std::to_string(f.size()) +
                                  " does not match grid size " + std::to_string(n_));
  }

 private:
  std::size_t n_;
  double length_;
  double dx_;
};

inline bool all_finite(std::span<const double> f) {
  for (double v : f)
    if (!std::isfinite(v)) return false;
  return true;
}

/// out_i = (f_{i+1} - f_i) / dx
inline Field diff_forward(const PeriodicGrid& grid, std::span<const double> f) {
  grid.check(f, "diff_forward");
  Field out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[grid.next(i)] - f[i]) / grid.dx();
  return out;
}

/// out_i = (f_i - f_{i-1}) / dx
inline Field diff_backward(const PeriodicGrid& grid, std::span<const double> f) {
  grid.check(f, "diff_backward");
  Field out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] - f[grid.prev(i)]) / grid.dx();
  return out;
}

/// out_i = (f_{i+1} - 2 f_i + f_{i-1}) / dx^2, formed as a difference of
/// first differences.
inline Field second_difference(const PeriodicGrid& grid, std::span<const double> f) {
  grid.check(f, "second_difference");
  Field out(f.size());
  const double dx2 = grid.dx() * grid.dx();
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = ((f[grid.next(i)] - f[i]) - (f[i] - f[grid.prev(i)])) / dx2;
  return out;
}

/// u_{i, xbar x xbar} = (f_{i+1} - 3 f_i + 3 f_{i-1} - f_{i-2}) / dx^3. Test utility.
inline Field third_difference(const PeriodicGrid& grid, std::span<const double> f) {
  grid.check(f, "third_difference");
  const Field lap = second_difference(grid, f);
  return diff_backward(grid, lap);
}

/// p_i = lap(lap_source)_i - Z+(zplus_source_i) - Z-(zminus_source_i).
///
/// The sources are separate so the semi-implicit scheme (Z- at the old level)
/// and the fully implicit scheme share this routine.
inline Field discrete_pressure(const PeriodicGrid& grid, const PhysicalModel& model,
                               std::span<const double> lap_source, std::span<const double> zplus_source,
                               std::span<const double> zminus_source) {
  grid.check(zplus_source, "discrete_pressure");
  grid.check(zminus_source, "discrete_pressure");
  Field p = second_difference(grid, lap_source);
  const bool stabilized = model.has_z_plus();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (stabilized && !(zplus_source[i] > 0.0))
      throw PositivityViolation("discrete_pressure: nonpositive thickness at a Z+ site", i);
    p[i] -= model.z_plus(zplus_source[i]) + model.z_minus(zminus_source[i]);
  }
  return p;
}

}  // namespace fiberfilm
