#pragma once

// Synthetic fringe-projection scenes: ground-truth phase surfaces, regular and
// inverted phase-shifted fringe stacks, and an 8-bit camera model with
// clipping, optional quantization and additive Gaussian noise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace hdrpmp {

/// Ordered phase steps. Steps are stored exactly as given; no reduction mod 2pi.
struct PhaseShiftSchedule {
  std::vector<double> steps;

  std::size_t count() const noexcept { return steps.size(); }

  /// N steps of 2pi/N starting at zero.
  static PhaseShiftSchedule equal(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "schedule needs at least one step");
    PhaseShiftSchedule s;
    for (std::size_t k = 0; k < n; ++k) s.steps.push_back(two_pi * static_cast<double>(k) / static_cast<double>(n));
    return s;
  }

  void require_solvable() const {
    if (steps.size() < 3)
      throw Error(ErrorCode::invalid_argument,
                  "a phase-shift schedule needs at least 3 steps, got " + std::to_string(steps.size()));
    for (double d : steps)
      if (!std::isfinite(d)) throw Error(ErrorCode::invalid_argument, "non-finite phase step");
  }

  friend bool operator==(const PhaseShiftSchedule&, const PhaseShiftSchedule&) = default;
};

enum class PatternKind { regular, inverted };

inline const char* to_string(PatternKind kind) noexcept {
  return kind == PatternKind::regular ? "regular" : "inverted";
}

struct CameraModel {
  double scale_factor = 1.0;
  double saturation_level = 255.0;
  int bit_depth = 8;
  double noise_mean = 0.0;
  double noise_variance = 0.0;
  std::uint64_t rng_seed = 0;
  // Round to the nearest integer before clamping. Off reproduces pure clipping.
  bool quantize = true;

  void validate() const {
    if (!(scale_factor > 0.0)) throw Error(ErrorCode::invalid_argument, "scale factor must be positive");
    if (!(saturation_level > 0.0)) throw Error(ErrorCode::invalid_argument, "saturation level must be positive");
    if (!(noise_variance >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise variance must be non-negative");
    if (bit_depth < 1 || bit_depth > 16) throw Error(ErrorCode::invalid_argument, "bit depth must be in [1, 16]");
  }
};

/// N same-sized intensity frames, one per phase step.
///
/// `saturated` is empty until the stack has passed through clip_quantize (or
/// was loaded from disk with a detection threshold); afterwards it holds one
/// flag layer per frame.
struct FringeStack {
  std::vector<Grid<double>> frames;
  std::vector<Mask> saturated;
  int bit_depth = 8;
  double saturation_level = 255.0;
  PatternKind kind = PatternKind::regular;
  PhaseShiftSchedule schedule;

  std::size_t count() const noexcept { return frames.size(); }
  std::size_t width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  std::size_t height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }
  bool has_saturation_flags() const noexcept { return !saturated.empty(); }

  /// Effective phase step of frame k: inverted frames carry an extra pi.
  double effective_step(std::size_t k) const noexcept {
    return schedule.steps[k] + (kind == PatternKind::inverted ? pi : 0.0);
  }

  void validate() const {
    if (frames.size() != schedule.count())
      throw Error(ErrorCode::invalid_argument, "frame count " + std::to_string(frames.size()) +
                                                   " does not match schedule count " +
                                                   std::to_string(schedule.count()));
    for (const auto& f : frames)
      if (!f.same_shape(frames.front()))
        throw Error(ErrorCode::invalid_argument, "frames differ in dimensions");
    if (!saturated.empty()) {
      if (saturated.size() != frames.size())
        throw Error(ErrorCode::invalid_argument, "saturation layers do not match frame count");
      for (const auto& s : saturated)
        if (!s.same_shape(frames.front()))
          throw Error(ErrorCode::invalid_argument, "saturation layer differs in dimensions");
    }
  }
};

/// Closed form of the surface used as object phase (MATLAB's `peaks`).
inline double peaks(double x, double y) noexcept {
  return 3.0 * (1.0 - x) * (1.0 - x) * std::exp(-x * x - (y + 1.0) * (y + 1.0)) -
         10.0 * (x / 5.0 - x * x * x - y * y * y * y * y) * std::exp(-x * x - y * y) -
         std::exp(-(x + 1.0) * (x + 1.0) - y * y) / 3.0;
}

/// Samples `peaks` on a uniform width x height grid spanning [-extent, extent]
/// in both axes; column index maps to x, row index to y.
inline PhaseMap peaks_phase(std::size_t width = 512, std::size_t height = 512, double extent = 3.0) {
  if (width < 2 || height < 2)
    throw Error(ErrorCode::invalid_argument, "peaks grid needs at least 2x2 pixels");
  if (!(extent > 0.0)) throw Error(ErrorCode::invalid_argument, "peaks extent must be positive");

  PhaseMap map(width, height);
  const double sx = 2.0 * extent / static_cast<double>(width - 1);
  const double sy = 2.0 * extent / static_cast<double>(height - 1);
  parallel_rows(height, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      const double yy = -extent + sy * static_cast<double>(y);
      for (std::size_t x = 0; x < width; ++x)
        map.values(x, y) = peaks(-extent + sx * static_cast<double>(x), yy);
    }
  });
  return map;
}

/// Linear carrier 2*pi*x/period added by the projected fringes.
inline double carrier_phase(std::size_t x, double period) noexcept {
  return two_pi * static_cast<double>(x) / period;
}

/// Object phase plus carrier: the quantity a phase-shifting solver recovers.
inline PhaseMap with_carrier(const PhaseMap& phase, double period) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "fringe period must be positive");
  PhaseMap out = phase;
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x) out.values(x, y) += carrier_phase(x, period);
  return out;
}

/// Real-valued frames S*127.5*(1 + cos(2*pi*x/p + phi + delta_k [+ pi])).
/// No clipping happens here.
inline FringeStack synth_stack(const PhaseMap& phase, const PhaseShiftSchedule& schedule,
                               const CameraModel& camera, double period, PatternKind kind) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "fringe period must be positive");
  camera.validate();
  if (schedule.count() == 0) throw Error(ErrorCode::invalid_argument, "empty phase-shift schedule");
  if (phase.valid_count() != phase.size())
    throw Error(ErrorCode::invalid_argument, "synthesis needs a phase map valid everywhere");

  FringeStack stack;
  stack.bit_depth = camera.bit_depth;
  stack.saturation_level = camera.saturation_level;
  stack.kind = kind;
  stack.schedule = schedule;
  stack.frames.assign(schedule.count(), Grid<double>(phase.width(), phase.height()));

  // cos(t + pi) == -cos(t); using the identity keeps each complementary pair
  // summing to 2*S*127.5 to the last bit of the cosine.
  const double sign = kind == PatternKind::inverted ? -1.0 : 1.0;
  const double amplitude = camera.scale_factor * 127.5;
  parallel_rows(phase.height(), [&](std::size_t y0, std::size_t y1) {
    for (std::size_t k = 0; k < schedule.count(); ++k) {
      auto& frame = stack.frames[k];
      for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = 0; x < phase.width(); ++x) {
          const double theta = carrier_phase(x, period) + phase.values(x, y) + schedule.steps[k];
          frame(x, y) = amplitude * (1.0 + sign * std::cos(theta));
        }
    }
  });
  return stack;
}

/// Rounds (when the camera quantizes) and clamps every intensity to
/// [0, saturation_level]. A sample is flagged saturated when its rounded value
/// reaches the saturation level.
inline FringeStack clip_quantize(const FringeStack& stack, const CameraModel& camera) {
  camera.validate();
  stack.validate();
  FringeStack out = stack;
  out.saturation_level = camera.saturation_level;
  out.bit_depth = camera.bit_depth;
  out.saturated.assign(stack.count(), Mask(stack.width(), stack.height(), 0));

  const double level = camera.saturation_level;
  for (std::size_t k = 0; k < stack.count(); ++k) {
    auto& frame = out.frames[k];
    auto& flags = out.saturated[k];
    for (std::size_t i = 0; i < frame.size(); ++i) {
      const double v = camera.quantize ? std::round(frame[i]) : frame[i];
      flags[i] = v >= level ? 1 : 0;
      frame[i] = std::clamp(v, 0.0, level);
    }
  }
  return out;
}

/// Adds N(mean, variance) to every sample. The generator is seeded from the
/// camera seed and the stack kind, so regular and inverted stacks receive
/// independent but reproducible noise.
inline FringeStack add_noise(const FringeStack& stack, const CameraModel& camera) {
  if (!(camera.noise_variance >= 0.0))
    throw Error(ErrorCode::invalid_argument, "noise variance must be non-negative");
  if (stack.has_saturation_flags())
    throw Error(ErrorCode::invalid_argument, "noise must be added before clipping");
  FringeStack out = stack;
  if (camera.noise_variance == 0.0) {
    if (camera.noise_mean != 0.0)
      for (auto& f : out.frames)
        for (auto& v : f) v += camera.noise_mean;
    return out;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(camera.rng_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(camera.rng_seed >> 32),
                    static_cast<std::uint32_t>(stack.kind == PatternKind::regular ? 0x5eedu : 0x1a7eu)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(camera.noise_mean, std::sqrt(camera.noise_variance));
  for (auto& f : out.frames)
    for (auto& v : f) v += noise(rng);
  return out;
}

/// Ground truth and the two captured stacks of one simulated measurement.
struct SimulatedScene {
  PhaseMap object_phase;
  PhaseMap fringe_phase;  // object phase plus carrier
  FringeStack regular;
  FringeStack inverted;
};

/// synth -> noise -> clip for both pattern kinds.
inline SimulatedScene simulate_scene(const PhaseMap& object_phase, const PhaseShiftSchedule& schedule,
                                     const CameraModel& camera, double period) {
  SimulatedScene scene;
  scene.object_phase = object_phase;
  scene.fringe_phase = with_carrier(object_phase, period);
  auto capture = [&](PatternKind kind) {
    return clip_quantize(add_noise(synth_stack(object_phase, schedule, camera, period, kind), camera), camera);
  };
  scene.regular = capture(PatternKind::regular);
  scene.inverted = capture(PatternKind::inverted);
  return scene;
}

}  // namespace hdrpmp
