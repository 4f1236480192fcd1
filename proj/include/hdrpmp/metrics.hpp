#pragma once

// RMSE and residual profiles against synthetic ground truth, and the
// saturation sweep comparing the three retrieval methods.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fringe_model.hpp"
#include "grid.hpp"
#include "hdr_retrieval.hpp"

namespace hdrpmp {

enum class PhaseComparison { wrapped, unwrapped };
enum class OffsetRemoval { none, two_pi_multiple, constant };

inline const char* to_string(PhaseComparison c) noexcept { return c == PhaseComparison::wrapped ? "wrapped" : "unwrapped"; }

inline const char* to_string(OffsetRemoval o) noexcept {
  switch (o) {
    case OffsetRemoval::none: return "none";
    case OffsetRemoval::two_pi_multiple: return "two-pi-multiple";
    case OffsetRemoval::constant: return "constant";
  }
  return "unknown";
}

struct RmseOptions {
  PhaseComparison comparison = PhaseComparison::wrapped;
  OffsetRemoval offset = OffsetRemoval::none;
};

struct RmseResult {
  double value = 0.0;
  std::size_t pixels = 0;
  double removed_offset = 0.0;
  RmseOptions mode;
};

inline Mask intersect_masks(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::invalid_argument, "masks differ in shape");
  Mask out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

/// Root-mean-square of (estimate - truth) over the masked pixels. Wrapped
/// comparisons map each difference to (-pi, pi]; unwrapped comparisons use the
/// raw difference. The optional offset is fitted over the same pixels and
/// removed before squaring.
inline RmseResult rmse(const PhaseMap& estimate, const PhaseMap& truth, const Mask& mask, const RmseOptions& opts = {}) {
  if (!estimate.values.same_shape(truth.values) || !estimate.values.same_shape(mask))
    throw Error(ErrorCode::invalid_argument, "rmse inputs differ in shape");

  std::vector<double> diff;
  diff.reserve(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double d = estimate.values[i] - truth.values[i];
    diff.push_back(opts.comparison == PhaseComparison::wrapped ? wrap_phase(d) : d);
  }
  if (diff.empty()) throw Error(ErrorCode::empty_domain, "rmse over an empty mask");

  RmseResult r;
  r.mode = opts;
  r.pixels = diff.size();
  const double count = static_cast<double>(diff.size());
  if (opts.comparison == PhaseComparison::wrapped) {
    if (opts.offset == OffsetRemoval::constant) {
      double s = 0, c = 0;
      for (double d : diff) {
        s += std::sin(d);
        c += std::cos(d);
      }
      r.removed_offset = std::atan2(s, c);
    }
  } else if (opts.offset != OffsetRemoval::none) {
    double mean = 0;
    for (double d : diff) mean += d;
    mean /= count;
    r.removed_offset = opts.offset == OffsetRemoval::constant ? mean : two_pi * std::round(mean / two_pi);
  }

  double acc = 0.0;
  for (double d : diff) {
    double e = d - r.removed_offset;
    if (opts.comparison == PhaseComparison::wrapped) e = wrap_phase(e);
    acc += e * e;
  }
  r.value = std::sqrt(acc / count);
  return r;
}

/// Over the pixels valid in both maps.
inline RmseResult rmse(const PhaseMap& estimate, const PhaseMap& truth, const RmseOptions& opts = {}) {
  return rmse(estimate, truth, intersect_masks(estimate.mask, truth.mask), opts);
}

/// Wrapped residual along one image row. Columns invalid in either map hold NaN.
struct ResidualProfile {
  std::size_t row = 0;
  std::vector<double> residual;

  double max_abs() const {
    double m = 0.0;
    for (double r : residual)
      if (std::isfinite(r)) m = std::max(m, std::abs(r));
    return m;
  }

  double median_abs() const {
    std::vector<double> a;
    for (double r : residual)
      if (std::isfinite(r)) a.push_back(std::abs(r));
    if (a.empty()) return 0.0;
    const auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
    std::nth_element(a.begin(), mid, a.end());
    if (a.size() % 2 == 1) return *mid;
    const double upper = *mid;
    return 0.5 * (upper + *std::max_element(a.begin(), mid));
  }
};

inline ResidualProfile residual_row(const PhaseMap& estimate, const PhaseMap& truth, std::size_t row) {
  if (!estimate.values.same_shape(truth.values))
    throw Error(ErrorCode::invalid_argument, "residual inputs differ in shape");
  if (row >= estimate.height())
    throw Error(ErrorCode::invalid_argument,
                "row " + std::to_string(row) + " outside image of height " + std::to_string(estimate.height()));
  ResidualProfile p;
  p.row = row;
  p.residual.resize(estimate.width());
  for (std::size_t x = 0; x < estimate.width(); ++x) {
    const std::size_t i = estimate.values.index(x, row);
    p.residual[x] = (estimate.mask[i] && truth.mask[i]) ? wrap_phase(estimate.values[i] - truth.values[i])
                                                        : std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Simulation studies

enum class Method { conventional, jiang, proposed };

inline const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::conventional: return "conventional";
    case Method::jiang: return "jiang";
    case Method::proposed: return "proposed";
  }
  return "unknown";
}

inline Method parse_method(const std::string& name) {
  if (name == "conventional") return Method::conventional;
  if (name == "jiang") return Method::jiang;
  if (name == "proposed") return Method::proposed;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + name + "'");
}

struct ExperimentConfig {
  // Scene: peaks surface on a width x height grid over [-extent, extent]^2.
  std::size_t width = 512;
  std::size_t height = 512;
  double extent = 3.0;
  PhaseShiftSchedule schedule = PhaseShiftSchedule::equal(3);
  std::vector<double> scale_factors{1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2};
  double period = 32.0;
  double noise_mean = 0.0;
  double noise_variance = 0.0;
  bool quantize = false;
  double saturation_level = 255.0;
  std::vector<Method> methods{Method::conventional, Method::jiang, Method::proposed};
  std::uint64_t seed = 0;
  std::string output_dir;

  void validate() const {
    if (width < 2 || height < 2) throw Error(ErrorCode::invalid_argument, "scene needs at least 2x2 pixels");
    if (!(extent > 0.0)) throw Error(ErrorCode::invalid_argument, "scene extent must be positive");
    if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "fringe period must be positive");
    if (scale_factors.empty()) throw Error(ErrorCode::invalid_argument, "scale-factor sweep is empty");
    for (double s : scale_factors)
      if (!(s > 0.0)) throw Error(ErrorCode::invalid_argument, "scale factors must be positive");
    if (methods.empty()) throw Error(ErrorCode::invalid_argument, "no retrieval method selected");
    if (!(noise_variance >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise variance must be non-negative");
    schedule.require_solvable();
  }

  CameraModel camera(double scale_factor) const {
    CameraModel cam;
    cam.scale_factor = scale_factor;
    cam.saturation_level = saturation_level;
    cam.noise_mean = noise_mean;
    cam.noise_variance = noise_variance;
    cam.rng_seed = seed;
    cam.quantize = quantize;
    return cam;
  }
};

inline SimulatedScene simulate(const ExperimentConfig& cfg, double scale_factor) {
  cfg.validate();
  return simulate_scene(peaks_phase(cfg.width, cfg.height, cfg.extent), cfg.schedule, cfg.camera(scale_factor),
                        cfg.period);
}

inline RetrievalResult run_method(Method method, const FringeStack& regular, const FringeStack& inverted,
                                  const SaturationConfig& sat = {}) {
  switch (method) {
    case Method::conventional: return retrieve_conventional(regular);
    case Method::jiang: return retrieve_jiang(regular, inverted, sat);
    case Method::proposed: return retrieve_proposed(regular, inverted, sat);
  }
  throw Error(ErrorCode::invalid_argument, "unknown method");
}

struct RmseCell {
  std::optional<double> rmse;  // empty: method not applicable at this configuration
  std::size_t pixels = 0;
  std::size_t invalid = 0;     // pixels this method itself left invalid
  std::string note;
};

/// cells[s][m] pairs scale_factors[s] with methods[m].
struct RmseTable {
  ExperimentConfig config;
  std::vector<std::vector<RmseCell>> cells;

  const RmseCell& at(std::size_t s, Method m) const {
    const auto it = std::find(config.methods.begin(), config.methods.end(), m);
    if (it == config.methods.end()) throw Error(ErrorCode::invalid_argument, "method not in table");
    return cells.at(s).at(static_cast<std::size_t>(it - config.methods.begin()));
  }
};

/// For every scale factor: simulate the peaks scene, run each method, and
/// score all applicable methods over the intersection of their valid masks
/// (wrapped comparison against object phase plus carrier).
inline RmseTable run_table1(const ExperimentConfig& cfg) {
  cfg.validate();
  RmseTable table;
  table.config = cfg;
  const PhaseMap object = peaks_phase(cfg.width, cfg.height, cfg.extent);

  for (double s : cfg.scale_factors) {
    const SimulatedScene scene = simulate_scene(object, cfg.schedule, cfg.camera(s), cfg.period);
    std::vector<RmseCell> row(cfg.methods.size());
    std::vector<std::optional<RetrievalResult>> results(cfg.methods.size());
    Mask common = scene.fringe_phase.mask;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      try {
        results[m] = run_method(cfg.methods[m], scene.regular, scene.inverted);
        common = intersect_masks(common, results[m]->wrapped.mask);
        row[m].invalid = results[m]->wrapped.size() - results[m]->wrapped.valid_count();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::unsupported_schedule) throw;
        row[m].note = e.what();
      }
    }
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      if (!results[m]) continue;
      try {
        const RmseResult r = rmse(results[m]->wrapped, scene.fringe_phase, common);
        row[m].rmse = r.value;
        row[m].pixels = r.pixels;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::empty_domain) throw;
        row[m].note = e.what();
      }
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

}  // namespace hdrpmp
