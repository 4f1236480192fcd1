#pragma once

// Whole-image phase retrieval from regular/inverted fringe stacks.
//
//  * retrieve_proposed     every unsaturated sample of the 2N frames, solved by
//                          generalized least squares
//  * retrieve_conventional the N regular frames only, saturation ignored
//  * retrieve_jiang        three-step complementary replacement: a saturated
//                          regular intensity is swapped for its inverted
//                          counterpart so that exactly three intensities remain

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fringe_model.hpp"
#include "grid.hpp"
#include "lsq_core.hpp"
#include "parallel.hpp"

namespace hdrpmp {

enum class InvalidReason : std::uint8_t {
  none = 0,
  too_few_samples = 1,
  ill_conditioned = 2,
  zero_modulation = 3,
};

inline const char* to_string(InvalidReason r) noexcept {
  switch (r) {
    case InvalidReason::none: return "none";
    case InvalidReason::too_few_samples: return "too-few-samples";
    case InvalidReason::ill_conditioned: return "ill-conditioned";
    case InvalidReason::zero_modulation: return "zero-modulation";
  }
  return "unknown";
}

/// How saturated samples are detected. Stacks that went through clip_quantize
/// carry exact flags; anything else (captured data) is thresholded.
struct SaturationConfig {
  double threshold = 250.0;
  bool use_recorded_flags = true;
};

struct SaturationMask {
  std::vector<Mask> regular;
  std::vector<Mask> inverted;

  bool regular_saturated(std::size_t k, std::size_t i) const noexcept { return regular[k][i] != 0; }
  bool inverted_saturated(std::size_t k, std::size_t i) const noexcept { return inverted[k][i] != 0; }
};

struct RetrievalResult {
  std::string method;
  PhaseMap wrapped;
  Grid<double> background;
  Grid<double> modulation;
  Grid<std::uint8_t> samples_used;
  Grid<InvalidReason> reason;
  // Jiang only: evaluations of the all-inverted closed form, and how many of
  // them disagreed (mod pi) with the reconstruction actually used.
  std::size_t closed_form_checks = 0;
  std::size_t closed_form_disagreements = 0;

  RetrievalResult() = default;
  RetrievalResult(std::string name, std::size_t width, std::size_t height)
      : method(std::move(name)),
        wrapped(width, height),
        background(width, height, 0.0),
        modulation(width, height, 0.0),
        samples_used(width, height, 0),
        reason(width, height, InvalidReason::none) {}

  std::size_t width() const noexcept { return wrapped.width(); }
  std::size_t height() const noexcept { return wrapped.height(); }

  std::size_t count(InvalidReason r) const noexcept {
    return static_cast<std::size_t>(std::count(reason.begin(), reason.end(), r));
  }
};

namespace detail {

inline Mask threshold_layer(const Grid<double>& frame, double threshold) {
  Mask m(frame.width(), frame.height(), 0);
  for (std::size_t i = 0; i < frame.size(); ++i) m[i] = frame[i] >= threshold ? 1 : 0;
  return m;
}

inline std::vector<Mask> saturation_layers(const FringeStack& stack, const SaturationConfig& cfg) {
  if (cfg.use_recorded_flags && stack.has_saturation_flags()) return stack.saturated;
  std::vector<Mask> layers;
  layers.reserve(stack.count());
  for (const auto& f : stack.frames) layers.push_back(threshold_layer(f, cfg.threshold));
  return layers;
}

inline void require_pair(const FringeStack& regular, const FringeStack& inverted) {
  regular.validate();
  inverted.validate();
  if (regular.width() != inverted.width() || regular.height() != inverted.height())
    throw Error(ErrorCode::invalid_argument, "regular and inverted stacks differ in dimensions");
  if (regular.schedule != inverted.schedule)
    throw Error(ErrorCode::invalid_argument, "regular and inverted stacks use different schedules");
  if (regular.kind != PatternKind::regular || inverted.kind != PatternKind::inverted)
    throw Error(ErrorCode::invalid_argument, "expected one regular and one inverted stack");
}

inline void store(RetrievalResult& out, std::size_t i, const PhaseSolution& sol, std::size_t used) {
  out.samples_used[i] = static_cast<std::uint8_t>(std::min<std::size_t>(used, 255));
  out.background[i] = sol.background;
  out.modulation[i] = sol.modulation();
  switch (sol.status) {
    case SolveStatus::ok:
      out.wrapped.values[i] = sol.phi;
      out.wrapped.mask[i] = 1;
      out.reason[i] = InvalidReason::none;
      return;
    case SolveStatus::ill_conditioned:
      out.reason[i] = InvalidReason::ill_conditioned;
      break;
    case SolveStatus::zero_modulation:
      out.reason[i] = InvalidReason::zero_modulation;
      break;
  }
  out.wrapped.values[i] = 0.0;
  out.wrapped.mask[i] = 0;
}

inline void store_too_few(RetrievalResult& out, std::size_t i, std::size_t used) {
  out.samples_used[i] = static_cast<std::uint8_t>(used);
  out.wrapped.values[i] = 0.0;
  out.wrapped.mask[i] = 0;
  out.reason[i] = InvalidReason::too_few_samples;
}

inline void collect_samples(const FringeStack& regular, const FringeStack& inverted, const SaturationMask& mask,
                            std::size_t i, PixelSampleSet& out) {
  out.samples.clear();
  out.excluded = 0;
  for (std::size_t k = 0; k < regular.count(); ++k) {
    if (mask.regular_saturated(k, i))
      ++out.excluded;
    else
      out.samples.push_back({regular.schedule.steps[k], regular.frames[k][i]});
  }
  for (std::size_t k = 0; k < inverted.count(); ++k) {
    if (mask.inverted_saturated(k, i))
      ++out.excluded;
    else
      out.samples.push_back({inverted.schedule.steps[k] + pi, inverted.frames[k][i]});
  }
}

}  // namespace detail

inline SaturationMask detect_saturation(const FringeStack& regular, const FringeStack& inverted,
                                        const SaturationConfig& cfg = {}) {
  detail::require_pair(regular, inverted);
  return {detail::saturation_layers(regular, cfg), detail::saturation_layers(inverted, cfg)};
}

/// Every unsaturated sample of the 2N frames at pixel (x, y); inverted frame k
/// enters with effective step delta_k + pi.
inline PixelSampleSet build_sample_set(const FringeStack& regular, const FringeStack& inverted,
                                       const SaturationMask& mask, std::size_t x, std::size_t y) {
  if (x >= regular.width() || y >= regular.height())
    throw Error(ErrorCode::invalid_argument, "pixel outside the stack");
  PixelSampleSet set;
  detail::collect_samples(regular, inverted, mask, y * regular.width() + x, set);
  return set;
}

inline RetrievalResult retrieve_proposed(const FringeStack& regular, const FringeStack& inverted,
                                         const SaturationConfig& cfg = {}, const SolverLimits& limits = {}) {
  const SaturationMask mask = detect_saturation(regular, inverted, cfg);
  RetrievalResult out("proposed", regular.width(), regular.height());
  const std::size_t width = regular.width();

  parallel_rows(regular.height(), [&](std::size_t y0, std::size_t y1) {
    PixelSampleSet set;
    set.samples.reserve(2 * regular.count());
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const std::size_t i = y * width + x;
        detail::collect_samples(regular, inverted, mask, i, set);
        if (set.size() < 3) {
          detail::store_too_few(out, i, set.size());
          continue;
        }
        detail::store(out, i, solve_pixel(set, limits), set.size());
      }
  });
  return out;
}

/// Fixed-schedule retrieval from the regular stack; clipped intensities are
/// used as they are.
inline RetrievalResult retrieve_conventional(const FringeStack& stack, const SolverLimits& limits = {}) {
  stack.validate();
  stack.schedule.require_solvable();
  RetrievalResult out("conventional", stack.width(), stack.height());
  const std::size_t width = stack.width();
  const std::size_t n = stack.count();

  parallel_rows(stack.height(), [&](std::size_t y0, std::size_t y1) {
    std::vector<PhaseSample> samples(n);
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const std::size_t i = y * width + x;
        for (std::size_t k = 0; k < n; ++k) samples[k] = {stack.effective_step(k), stack.frames[k][i]};
        detail::store(out, i, solve_pixel(samples, limits), n);
      }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Complementary replacement (three-step baseline)

/// Orientation of a three-step schedule with equal 2pi/3 spacing.
struct ThreeStepLayout {
  double first_step = 0.0;
  bool ascending = true;
};

inline std::optional<ThreeStepLayout> three_step_layout(const PhaseShiftSchedule& schedule, double tol = 1e-9) {
  if (schedule.count() != 3) return std::nullopt;
  const double third = two_pi / 3.0;
  const double d1 = wrap_phase(schedule.steps[1] - schedule.steps[0]);
  const double d2 = wrap_phase(schedule.steps[2] - schedule.steps[1]);
  if (std::abs(d1 - third) <= tol && std::abs(d2 - third) <= tol) return ThreeStepLayout{schedule.steps[0], true};
  if (std::abs(d1 + third) <= tol && std::abs(d2 + third) <= tol) return ThreeStepLayout{schedule.steps[0], false};
  return std::nullopt;
}

/// Classical three-step phase for I_k = A + B cos(phi + first + (k-1) * s),
/// s = +-2pi/3.
inline PhaseSolution classical_three_step(double i1, double i2, double i3, const ThreeStepLayout& layout,
                                          const SolverLimits& limits = {}) {
  if (!layout.ascending) std::swap(i2, i3);
  const double num = std::sqrt(3.0) * (i3 - i2);
  const double den = 2.0 * i1 - i2 - i3;
  PhaseSolution sol;
  sol.background = (i1 + i2 + i3) / 3.0;
  const double b = std::hypot(num, den) / 3.0;
  sol.condition = 1.0;
  if (b <= limits.zero_modulation * std::max(1.0, std::abs(sol.background))) {
    sol.status = SolveStatus::zero_modulation;
    return sol;
  }
  sol.phi = wrap_phase(std::atan2(num, den) - layout.first_step);
  sol.p = b * std::cos(sol.phi);
  sol.q = b * std::sin(sol.phi);
  return sol;
}

/// The printed all-inverted closed form, evaluated verbatim on the three
/// inverted intensities. Single-argument arctangent: defined mod pi.
inline double all_inverted_closed_form(double b1, double b2, double b3) {
  return std::atan(2.0 * (b1 - b3) / (std::sqrt(3.0) * (b2 - b1 - b3)));
}

enum class SampleSource : std::uint8_t { regular, inverted, none };

/// Per-frame choice under complementary replacement: the regular sample if
/// unsaturated, else its inverted counterpart if unsaturated, else nothing.
inline std::vector<SampleSource> replacement_sources(const SaturationMask& mask, std::size_t n, std::size_t i) {
  std::vector<SampleSource> src(n, SampleSource::none);
  for (std::size_t k = 0; k < n; ++k) {
    if (!mask.regular_saturated(k, i))
      src[k] = SampleSource::regular;
    else if (!mask.inverted_saturated(k, i))
      src[k] = SampleSource::inverted;
  }
  return src;
}

/// Number of distinct steps (mod 2pi) among the usable samples that
/// complementary replacement leaves at one pixel.
inline std::size_t replacement_distinct_steps(const FringeStack& regular, const SaturationMask& mask,
                                              std::size_t i, double tol = 1e-9) {
  std::vector<double> steps;
  const auto src = replacement_sources(mask, regular.count(), i);
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k] == SampleSource::none) continue;
    const double s = regular.schedule.steps[k] + (src[k] == SampleSource::inverted ? pi : 0.0);
    const bool seen = std::any_of(steps.begin(), steps.end(),
                                  [&](double t) { return std::abs(wrap_phase(s - t)) <= tol; });
    if (!seen) steps.push_back(s);
  }
  return steps.size();
}

/// Pixels where complementary replacement keeps fewer than three distinct
/// steps, so no three-intensity formula can recover the phase there. Works for
/// any schedule, including those retrieve_jiang refuses.
inline std::size_t count_replacement_shortfalls(const FringeStack& regular, const FringeStack& inverted,
                                                const SaturationConfig& cfg = {}) {
  const SaturationMask mask = detect_saturation(regular, inverted, cfg);
  std::size_t n = 0;
  for (std::size_t i = 0; i < regular.width() * regular.height(); ++i)
    n += replacement_distinct_steps(regular, mask, i) < 3;
  return n;
}

inline RetrievalResult retrieve_jiang(const FringeStack& regular, const FringeStack& inverted,
                                      const SaturationConfig& cfg = {}, const SolverLimits& limits = {}) {
  const SaturationMask mask = detect_saturation(regular, inverted, cfg);
  const auto layout = three_step_layout(regular.schedule);
  if (!layout)
    throw Error(ErrorCode::unsupported_schedule,
                "complementary replacement needs a three-step schedule with equal 2pi/3 spacing, got " +
                    std::to_string(regular.schedule.count()) + " steps");
  const ThreeStepLayout inverted_layout{layout->first_step + pi, layout->ascending};

  RetrievalResult out("jiang", regular.width(), regular.height());
  const std::size_t width = regular.width();
  std::atomic<std::size_t> checks{0}, disagreements{0};

  parallel_rows(regular.height(), [&](std::size_t y0, std::size_t y1) {
    std::size_t local_checks = 0, local_disagreements = 0;
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const std::size_t i = y * width + x;
        const auto src = replacement_sources(mask, 3, i);
        const auto usable = static_cast<std::size_t>(
            std::count_if(src.begin(), src.end(), [](SampleSource s) { return s != SampleSource::none; }));
        if (usable < 3) {
          detail::store_too_few(out, i, usable);
          continue;
        }
        auto reg = [&](std::size_t k) { return regular.frames[k][i]; };
        auto inv = [&](std::size_t k) { return inverted.frames[k][i]; };

        const auto n_inverted =
            static_cast<std::size_t>(std::count(src.begin(), src.end(), SampleSource::inverted));
        if (n_inverted == 0) {
          detail::store(out, i, classical_three_step(reg(0), reg(1), reg(2), *layout, limits), 3);
          continue;
        }
        if (n_inverted == 3) {
          const PhaseSolution sol = classical_three_step(inv(0), inv(1), inv(2), inverted_layout, limits);
          if (sol.valid()) {
            ++local_checks;
            const double printed = all_inverted_closed_form(inv(0), inv(1), inv(2));
            if (std::abs(std::remainder(printed - sol.phi, pi)) > 1e-6) ++local_disagreements;
          }
          detail::store(out, i, sol, 3);
          continue;
        }

        // Mixed: 2A from a frame whose regular and inverted samples are both
        // unsaturated, then I_k = 2A - I_k^inv for every replaced frame.
        std::optional<double> twice_background;
        for (std::size_t k = 0; k < 3 && !twice_background; ++k)
          if (!mask.regular_saturated(k, i) && !mask.inverted_saturated(k, i)) twice_background = reg(k) + inv(k);

        if (twice_background) {
          double values[3];
          for (std::size_t k = 0; k < 3; ++k)
            values[k] = src[k] == SampleSource::regular ? reg(k) : *twice_background - inv(k);
          detail::store(out, i, classical_three_step(values[0], values[1], values[2], *layout, limits), 3);
        } else {
          // No complementary pair survives: solve the three mixed intensities
          // directly at their effective steps.
          PhaseSample samples[3];
          for (std::size_t k = 0; k < 3; ++k)
            samples[k] = src[k] == SampleSource::regular
                             ? PhaseSample{regular.schedule.steps[k], reg(k)}
                             : PhaseSample{regular.schedule.steps[k] + pi, inv(k)};
          detail::store(out, i, solve_pixel(samples, limits), 3);
        }
      }
    checks += local_checks;
    disagreements += local_disagreements;
  });
  out.closed_form_checks = checks;
  out.closed_form_disagreements = disagreements;
  return out;
}

}  // namespace hdrpmp
