#pragma once

// Per-pixel generalized phase-shifting least squares.
//
// Model for one pixel and K samples (delta_k, I_k):
//
//   I_k = A + p cos(delta_k) - q sin(delta_k),   p = B cos(phi), q = B sin(phi)
//
// Minimizing sum_k (A + p cos - q sin - I_k)^2 gives the 3x3 normal system
//
//   [  a  -e   c ] [p]   [  g ]
//   [ -e   b  -d ] [q] = [ -f ]
//   [  c  -d   K ] [A]   [  h ]
//
// with a = sum cos^2, b = sum sin^2, c = sum cos, d = sum sin,
// e = sum sin*cos, f = sum sin*I, g = sum cos*I, h = sum I.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace hdrpmp {

struct PhaseSample {
  double step;       // effective phase step, radians
  double intensity;  // measured intensity
};

/// Unsaturated samples selected for one pixel, plus how many were dropped.
struct PixelSampleSet {
  std::vector<PhaseSample> samples;
  std::size_t excluded = 0;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t offered() const noexcept { return samples.size() + excluded; }
};

struct TrigSums {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0, g = 0, h = 0;
  std::size_t count = 0;
};

enum class SolveStatus { ok, ill_conditioned, zero_modulation };

struct PhaseSolution {
  double p = 0.0;           // B cos(phi)
  double q = 0.0;           // B sin(phi)
  double background = 0.0;  // A
  double phi = 0.0;         // wrapped, (-pi, pi]
  double condition = 0.0;   // 1-norm condition estimate of the normal matrix
  SolveStatus status = SolveStatus::ok;

  bool valid() const noexcept { return status == SolveStatus::ok; }
  double modulation() const noexcept { return std::hypot(p, q); }
};

/// Rejection thresholds for the normal matrix.
struct SolverLimits {
  double min_relative_determinant = 1e-10;  // |det U| must reach this times K^3
  double max_condition = 1e8;
  double zero_modulation = 1e-10;  // B below this times max(1, |A|) counts as no modulation
};

inline TrigSums accumulate_sums(std::span<const PhaseSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "cannot accumulate an empty sample set");
  TrigSums s;
  for (const auto& smp : samples) {
    const double cs = std::cos(smp.step);
    const double sn = std::sin(smp.step);
    s.a += cs * cs;
    s.b += sn * sn;
    s.c += cs;
    s.d += sn;
    s.e += sn * cs;
    s.f += sn * smp.intensity;
    s.g += cs * smp.intensity;
    s.h += smp.intensity;
  }
  s.count = samples.size();
  return s;
}

inline TrigSums accumulate_sums(const PixelSampleSet& set) { return accumulate_sums(set.samples); }

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

/// Normal matrix U and right-hand side Q built from the sums.
inline Matrix3 normal_matrix(const TrigSums& s) {
  const double k = static_cast<double>(s.count);
  return {{{s.a, -s.e, s.c}, {-s.e, s.b, -s.d}, {s.c, -s.d, k}}};
}

inline Vector3 normal_rhs(const TrigSums& s) { return {s.g, -s.f, s.h}; }

namespace detail {

inline double determinant(const Matrix3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline double norm1(const Matrix3& m) {
  double best = 0.0;
  for (int j = 0; j < 3; ++j)
    best = std::max(best, std::abs(m[0][j]) + std::abs(m[1][j]) + std::abs(m[2][j]));
  return best;
}

inline Matrix3 adjugate(const Matrix3& m) {
  Matrix3 adj{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    }
  return adj;
}

/// Gaussian elimination with partial pivoting.
inline Vector3 solve3(Matrix3 m, Vector3 rhs) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int r = col + 1; r < 3; ++r) {
      const double factor = m[r][col] / m[col][col];
      for (int c = col; c < 3; ++c) m[r][c] -= factor * m[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  Vector3 x{};
  for (int r = 2; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  return x;
}

}  // namespace detail

/// Least-squares (p, q, A) and phi for one pixel. Fewer than three samples
/// throws; a singular or near-singular design returns an invalid solution.
inline PhaseSolution solve_pixel(std::span<const PhaseSample> samples, const SolverLimits& limits = {}) {
  if (samples.size() < 3)
    throw Error(ErrorCode::underdetermined,
                "phase retrieval needs at least 3 samples, got " + std::to_string(samples.size()));

  const TrigSums sums = accumulate_sums(samples);
  const Matrix3 u = normal_matrix(sums);
  const double k = static_cast<double>(sums.count);

  PhaseSolution sol;
  const double det = detail::determinant(u);
  if (!(std::abs(det) >= limits.min_relative_determinant * k * k * k)) {
    sol.status = SolveStatus::ill_conditioned;
    sol.condition = std::numeric_limits<double>::infinity();
    return sol;
  }
  Matrix3 inv = detail::adjugate(u);
  for (auto& row : inv)
    for (auto& v : row) v /= det;
  sol.condition = detail::norm1(u) * detail::norm1(inv);
  if (!(sol.condition <= limits.max_condition)) {
    sol.status = SolveStatus::ill_conditioned;
    return sol;
  }

  const Vector3 x = detail::solve3(u, normal_rhs(sums));
  sol.p = x[0];
  sol.q = x[1];
  sol.background = x[2];
  if (!std::isfinite(sol.p) || !std::isfinite(sol.q) || !std::isfinite(sol.background)) {
    sol.status = SolveStatus::ill_conditioned;
    return sol;
  }
  if (sol.modulation() <= limits.zero_modulation * std::max(1.0, std::abs(sol.background))) {
    sol.status = SolveStatus::zero_modulation;
    return sol;
  }
  sol.phi = std::atan2(sol.q, sol.p);
  if (sol.phi <= -pi) sol.phi = pi;
  return sol;
}

inline PhaseSolution solve_pixel(const PixelSampleSet& set, const SolverLimits& limits = {}) {
  return solve_pixel(std::span<const PhaseSample>(set.samples), limits);
}

/// Numerator and denominator of the closed-form tangent. Both equal the direct
/// solution's (q, p) scaled by the Gram determinant
/// (Ka - c^2)(Kb - d^2) - (Ke - cd)^2, which is never negative.
struct ClosedFormPhase {
  double numerator = 0.0;    // ~ q
  double denominator = 0.0;  // ~ p

  double phi() const noexcept { return std::atan2(numerator, denominator); }
};

inline ClosedFormPhase phase_closed_form(const TrigSums& s, std::size_t count) {
  const double k = static_cast<double>(count);
  const double gk = k * s.g - s.h * s.c;
  const double fk = k * s.f - s.h * s.d;
  ClosedFormPhase out;
  out.numerator = gk * (k * s.e - s.c * s.d) - fk * (k * s.a - s.c * s.c);
  out.denominator = gk * (k * s.b - s.d * s.d) - fk * (k * s.e - s.d * s.c);
  return out;
}

/// Sum of squared residuals of the model (A, p, q) over the samples.
inline double objective(std::span<const PhaseSample> samples, double background, double p, double q) {
  double e = 0.0;
  for (const auto& smp : samples) {
    const double r = background + p * std::cos(smp.step) - q * std::sin(smp.step) - smp.intensity;
    e += r * r;
  }
  return e;
}

inline double objective(std::span<const PhaseSample> samples, const PhaseSolution& sol) {
  return objective(samples, sol.background, sol.p, sol.q);
}

}  // namespace hdrpmp
