#pragma once

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fiberfilm/errors.hpp"

namespace fiberfilm {

/// Square matrix whose row i couples only columns i-2..i+2 (mod n).
///
/// Stored as n rows of five diagonals; the wrap-around entries of the first
/// and last two rows form the periodic corner blocks.
class CyclicBandedMatrix {
 public:
  static constexpr int kHalfBandwidth = 2;
  static constexpr int kWidth = 2 * kHalfBandwidth + 1;

  explicit CyclicBandedMatrix(std::size_t n) : n_(n), band_(n * kWidth, 0.0) {
    if (n < 2 * kWidth - 2) throw std::invalid_argument("CyclicBandedMatrix: dimension must be >= 8");
  }

  std::size_t size() const noexcept { return n_; }

  /// Entry in row i, column (i + offset) mod n, offset in [-2, 2].
  double& at(std::size_t i, int offset) { return band_[i * kWidth + (offset + kHalfBandwidth)]; }
  double at(std::size_t i, int offset) const { return band_[i * kWidth + (offset + kHalfBandwidth)]; }

  std::size_t column(std::size_t i, int offset) const noexcept {
    const auto n = static_cast<long long>(n_);
    long long j = (static_cast<long long>(i) + offset) % n;
    if (j < 0) j += n;
    return static_cast<std::size_t>(j);
  }

  /// Dense value A(i, j); zero outside the cyclic band.
  double operator()(std::size_t i, std::size_t j) const {
    for (int o = -kHalfBandwidth; o <= kHalfBandwidth; ++o)
      if (column(i, o) == j) return at(i, o);
    return 0.0;
  }

  static CyclicBandedMatrix identity(std::size_t n) {
    CyclicBandedMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, 0) = 1.0;
    return m;
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (int o = -kHalfBandwidth; o <= kHalfBandwidth; ++o) acc += at(i, o) * x[column(i, o)];
      y[i] = acc;
    }
    return y;
  }

  /// Row-major dense copy.
  std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (int o = -kHalfBandwidth; o <= kHalfBandwidth; ++o) d[i * n_ + column(i, o)] += at(i, o);
    return d;
  }

  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double row = 0.0;
      for (int o = -kHalfBandwidth; o <= kHalfBandwidth; ++o) row += std::abs(at(i, o));
      best = std::max(best, row);
    }
    return best;
  }

 private:
  std::size_t n_;
  std::vector<double> band_;
};

enum class LinearSolverKind { Auto, Banded, Dense };

namespace detail {

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Solves a row-major dense system in place; rhs is overwritten.
inline void dense_solve_in_place(std::vector<double>& a, std::size_t n, std::span<double> rhs,
                                 std::size_t nrhs = 1) {
  std::vector<lapack_int> piv(n);
  const lapack_int info =
      LAPACKE_dgesv(LAPACK_ROW_MAJOR, static_cast<lapack_int>(n), static_cast<lapack_int>(nrhs), a.data(),
                    static_cast<lapack_int>(n), piv.data(), rhs.data(), static_cast<lapack_int>(nrhs));
  if (info != 0) throw LinearSolveError("dense LU: singular matrix");
}

inline std::vector<double> solve_dense(const CyclicBandedMatrix& a, std::span<const double> rhs) {
  std::vector<double> dense = a.to_dense();
  std::vector<double> x(rhs.begin(), rhs.end());
  dense_solve_in_place(dense, a.size(), x);
  return x;
}

// Banded LU of the non-cyclic part plus a rank-4 Woodbury correction for the
// corner entries: A = B + U V^T with U = [e_0, e_1, e_{n-2}, e_{n-1}].
inline std::vector<double> solve_banded_woodbury(const CyclicBandedMatrix& a, std::span<const double> rhs) {
  constexpr int kl = CyclicBandedMatrix::kHalfBandwidth;
  constexpr int ku = CyclicBandedMatrix::kHalfBandwidth;
  constexpr int ldab = 2 * kl + ku + 1;
  const std::size_t n = a.size();
  const auto ln = static_cast<long long>(n);

  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  const std::array<std::size_t, 4> corner_rows = {0, 1, n - 2, n - 1};
  std::array<std::vector<double>, 4> v;
  for (auto& row : v) row.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    for (int o = -kl; o <= ku; ++o) {
      const long long j = static_cast<long long>(i) + o;
      const double value = a.at(i, o);
      if (j >= 0 && j < ln) {
        // Column-major band storage: AB(kl + ku + i - j, j).
        ab[static_cast<std::size_t>(j) * ldab + static_cast<std::size_t>(kl + ku + static_cast<long long>(i) - j)] =
            value;
      } else {
        const std::size_t r = i < 2 ? i : i - (n - 4);
        v[r][a.column(i, o)] += value;
      }
    }
  }

  // Right-hand sides: b and the four unit columns of U (column-major).
  constexpr int nrhs = 5;
  std::vector<double> rhs_block(n * nrhs, 0.0);
  std::copy(rhs.begin(), rhs.end(), rhs_block.begin());
  for (std::size_t r = 0; r < 4; ++r) rhs_block[(r + 1) * n + corner_rows[r]] = 1.0;

  std::vector<lapack_int> piv(n);
  const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), kl, ku, nrhs, ab.data(), ldab,
                                        piv.data(), rhs_block.data(), static_cast<lapack_int>(n));
  if (info != 0) throw LinearSolveError("banded LU: singular band part");

  std::span<const double> y(rhs_block.data(), n);
  auto z = [&](std::size_t r) { return std::span<const double>(rhs_block.data() + (r + 1) * n, n); };

  // Capacitance system (I + V^T Z) w = V^T y.
  std::vector<double> cap(16, 0.0);
  std::array<double, 4> w{};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      double acc = r == c ? 1.0 : 0.0;
      const auto zc = z(c);
      for (std::size_t k = 0; k < n; ++k) acc += v[r][k] * zc[k];
      cap[r * 4 + c] = acc;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += v[r][k] * y[k];
    w[r] = acc;
  }
  dense_solve_in_place(cap, 4, w);

  std::vector<double> x(y.begin(), y.end());
  for (std::size_t r = 0; r < 4; ++r) {
    const auto zr = z(r);
    for (std::size_t k = 0; k < n; ++k) x[k] -= zr[k] * w[r];
  }
  return x;
}

}  // namespace detail

/// Solves J x = rhs.
///
/// Auto uses dense LU for n <= 64 and banded LU with the corner correction
/// above that, falling back to dense LU (n <= 1024) when the banded result
/// fails a backward-error check. Throws LinearSolveError when the system is
/// singular or the solution is not finite.
inline std::vector<double> solve_linear(const CyclicBandedMatrix& j, std::span<const double> rhs,
                                        LinearSolverKind kind = LinearSolverKind::Auto) {
  const std::size_t n = j.size();
  if (rhs.size() != n) throw std::invalid_argument("solve_linear: rhs length mismatch");
  constexpr std::size_t kDenseLimit = 64;
  constexpr std::size_t kDenseFallbackLimit = 1024;

  auto finite = [](const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
  };

  if (kind == LinearSolverKind::Dense || (kind == LinearSolverKind::Auto && n <= kDenseLimit)) {
    auto x = detail::solve_dense(j, rhs);
    if (!finite(x)) throw LinearSolveError("dense LU: non-finite solution");
    return x;
  }

  std::vector<double> x;
  bool ok = false;
  try {
    x = detail::solve_banded_woodbury(j, rhs);
    ok = finite(x);
    if (ok) {
      auto residual = j.multiply(x);
      for (std::size_t i = 0; i < n; ++i) residual[i] = rhs[i] - residual[i];
      const double scale = j.norm_inf() * detail::max_abs(x) + detail::max_abs(rhs);
      if (detail::max_abs(residual) > 1e-12 * scale) {
        // One step of iterative refinement before giving up on the banded path.
        const auto correction = detail::solve_banded_woodbury(j, residual);
        for (std::size_t i = 0; i < n; ++i) x[i] += correction[i];
        auto again = j.multiply(x);
        for (std::size_t i = 0; i < n; ++i) again[i] = rhs[i] - again[i];
        ok = finite(x) && detail::max_abs(again) <= 1e-10 * scale;
      }
    }
  } catch (const LinearSolveError&) {
    ok = false;
  }
  if (ok) return x;
  if (kind == LinearSolverKind::Banded || n > kDenseFallbackLimit)
    throw LinearSolveError("banded solve failed for cyclic system");
  x = detail::solve_dense(j, rhs);
  if (!finite(x)) throw LinearSolveError("dense LU: non-finite solution");
  return x;
}

}  // namespace fiberfilm
