#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's solver or synthesis code.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "hdrpmp/lsq_core.hpp"

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Forward model I_k = A + B cos(phi + delta_k).
inline std::vector<hdrpmp::PhaseSample> forward(double A, double B, double phi, const std::vector<double>& steps) {
  std::vector<hdrpmp::PhaseSample> out;
  for (double d : steps) out.push_back({d, A + B * std::cos(phi + d)});
  return out;
}

/// Wrapped angular distance in [0, pi].
inline double angle_error(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * pi));
}

/// Trig sums accumulated in long double, one term at a time.
struct Sums {
  long double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0, g = 0, h = 0;
};

inline Sums sums(const std::vector<hdrpmp::PhaseSample>& samples) {
  Sums s;
  for (const auto& smp : samples) {
    const long double cs = std::cos(static_cast<long double>(smp.step));
    const long double sn = std::sin(static_cast<long double>(smp.step));
    const long double I = smp.intensity;
    s.a += cs * cs;
    s.b += sn * sn;
    s.c += cs;
    s.d += sn;
    s.e += sn * cs;
    s.f += sn * I;
    s.g += cs * I;
    s.h += I;
  }
  return s;
}

/// The peaks surface written out term by term in long double.
inline long double peaks(long double x, long double y) {
  const long double t1 = 3.0L * (1.0L - x) * (1.0L - x) * std::exp(-(x * x) - (y + 1.0L) * (y + 1.0L));
  const long double t2 = 10.0L * (x / 5.0L - std::pow(x, 3.0L) - std::pow(y, 5.0L)) * std::exp(-(x * x) - y * y);
  const long double t3 = std::exp(-(x + 1.0L) * (x + 1.0L) - y * y) / 3.0L;
  return t1 - t2 - t3;
}

struct GridFit {
  double phi = 0.0;  // in [0, 2pi)
  double A = 0.0;
  double B = 0.0;
  double objective = 0.0;
  bool degenerate = false;  // every grid point fits equally well
};

/// Exhaustive scan of phi over grid_size points of [0, 2pi). At each phi the
/// model is linear in (A, B); the 2x2 least-squares system is solved in
/// closed form with B constrained to be non-negative.
inline GridFit brute_force_oracle(const std::vector<hdrpmp::PhaseSample>& samples, std::size_t grid_size) {
  const double K = static_cast<double>(samples.size());
  double sum_i = 0.0;
  for (const auto& s : samples) sum_i += s.intensity;

  GridFit best;
  best.objective = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double phi = 2.0 * pi * static_cast<double>(j) / static_cast<double>(grid_size);
    double su = 0, suu = 0, siu = 0;
    for (const auto& s : samples) {
      const double u = std::cos(phi + s.step);
      su += u;
      suu += u * u;
      siu += s.intensity * u;
    }
    const double det = K * suu - su * su;
    double A = sum_i / K, B = 0.0;
    if (det > 1e-12 * K * K) {
      const double b = (K * siu - su * sum_i) / det;
      if (b > 0.0) {
        B = b;
        A = (sum_i - B * su) / K;
      }
    }
    double obj = 0.0;
    for (const auto& s : samples) {
      const double r = A + B * std::cos(phi + s.step) - s.intensity;
      obj += r * r;
    }
    if (obj < best.objective) best = {phi, A, B, obj, false};
    worst = std::max(worst, obj);
  }
  best.degenerate = worst - best.objective <= 1e-9 * (1.0 + best.objective);
  return best;
}

/// Random schedule of k >= 3 steps in [-2pi, 4pi). The first three are
/// pairwise at least min_gap apart mod pi, which bounds the conditioning of
/// the normal matrix; the rest are unconstrained.
inline std::vector<double> well_conditioned_steps(std::mt19937_64& rng, std::size_t k, double min_gap = 0.5) {
  std::uniform_real_distribution<double> u(-2.0 * pi, 4.0 * pi);
  auto apart = [&](double x, double y) { return std::abs(std::remainder(x - y, pi)) >= min_gap; };
  std::vector<double> steps;
  while (steps.size() < 3) {
    const double s = u(rng);
    bool ok = true;
    for (double t : steps) ok = ok && apart(s, t);
    if (ok) steps.push_back(s);
  }
  while (steps.size() < k) steps.push_back(u(rng));
  return steps;
}

}  // namespace oracle
