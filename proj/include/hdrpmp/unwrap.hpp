#pragma once

// Quality-guided flood unwrapping over the valid region of a wrapped phase map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "hdr_retrieval.hpp"

namespace hdrpmp {

/// Per-pixel reliability, higher is better. Invalid pixels hold min_score.
struct QualityMap {
  static constexpr double min_score = 0.0;
  Grid<double> scores;
};

struct QualityOptions {
  double epsilon = 1e-3;  // rad^2, keeps flat regions finite
};

/// score = B / (epsilon + var(dx) + var(dy)), where dx and dy are the raw
/// horizontal and vertical differences of the wrapped map inside the 3x3
/// window. Wrap lines show up as large differences and so score low.
inline QualityMap quality_map(const PhaseMap& wrapped, const Grid<double>& modulation,
                              const QualityOptions& opts = {}) {
  wrapped.validate();
  if (!wrapped.values.same_shape(modulation))
    throw Error(ErrorCode::invalid_argument, "modulation and phase maps differ in shape");
  if (wrapped.valid_count() == 0) throw Error(ErrorCode::empty_domain, "quality map of an all-invalid phase map");

  const std::size_t w = wrapped.width(), h = wrapped.height();
  QualityMap q{Grid<double>(w, h, QualityMap::min_score)};
  auto ok = [&](std::size_t x, std::size_t y) { return wrapped.mask(x, y) != 0; };

  parallel_rows(h, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        if (!ok(x, y)) continue;
        double sx = 0, sxx = 0, sy = 0, syy = 0;
        std::size_t nx = 0, ny = 0;
        const std::size_t xa = x > 0 ? x - 1 : 0, xb = std::min(w - 1, x + 1);
        const std::size_t ya = y > 0 ? y - 1 : 0, yb = std::min(h - 1, y + 1);
        for (std::size_t v = ya; v <= yb; ++v)
          for (std::size_t u = xa; u <= xb; ++u) {
            if (!ok(u, v)) continue;
            if (u + 1 < w && ok(u + 1, v)) {
              const double d = wrapped.values(u + 1, v) - wrapped.values(u, v);
              sx += d;
              sxx += d * d;
              ++nx;
            }
            if (v + 1 < h && ok(u, v + 1)) {
              const double d = wrapped.values(u, v + 1) - wrapped.values(u, v);
              sy += d;
              syy += d * d;
              ++ny;
            }
          }
        double variance = 0.0;
        if (nx > 0) variance += std::max(0.0, sxx / nx - (sx / nx) * (sx / nx));
        if (ny > 0) variance += std::max(0.0, syy / ny - (sy / ny) * (sy / ny));
        const double b = modulation(x, y);
        q.scores(x, y) = std::isfinite(b) && b > 0.0 ? b / (opts.epsilon + variance) : QualityMap::min_score;
      }
  });
  return q;
}

inline QualityMap quality_map(const RetrievalResult& result, const QualityOptions& opts = {}) {
  return quality_map(result.wrapped, result.modulation, opts);
}

/// Flood fill from the best pixel of each 4-connected valid component, always
/// extending from the highest-quality frontier pixel. Equal scores pop in
/// row-major order. Each component is determined up to one 2*pi*k offset.
inline PhaseMap unwrap_quality_guided(const PhaseMap& wrapped, const QualityMap& quality) {
  wrapped.validate();
  if (!wrapped.values.same_shape(quality.scores))
    throw Error(ErrorCode::invalid_argument, "quality and phase maps differ in shape");

  const std::size_t w = wrapped.width(), h = wrapped.height(), n = wrapped.size();
  PhaseMap out(w, h);
  out.mask = wrapped.mask;
  std::vector<std::uint8_t> done(n, 0);

  struct Entry {
    double score;
    std::size_t index;
  };
  // Top of the heap: highest score, then lowest index.
  auto lower_priority = [](const Entry& a, const Entry& b) {
    return a.score < b.score || (a.score == b.score && a.index > b.index);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower_priority)> frontier(lower_priority);

  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < n; ++i)
    if (wrapped.mask[i]) seeds.push_back(i);
  std::stable_sort(seeds.begin(), seeds.end(),
                   [&](std::size_t a, std::size_t b) { return quality.scores[a] > quality.scores[b]; });

  auto visit = [&](std::size_t from, std::size_t to) {
    if (!wrapped.mask[to] || done[to]) return;
    done[to] = 1;
    const double wv = wrapped.values[to];
    out.values[to] = wv + two_pi * std::round((out.values[from] - wv) / two_pi);
    frontier.push({quality.scores[to], to});
  };

  for (std::size_t seed : seeds) {
    if (done[seed]) continue;
    done[seed] = 1;
    out.values[seed] = wrapped.values[seed];
    frontier.push({quality.scores[seed], seed});
    while (!frontier.empty()) {
      const std::size_t i = frontier.top().index;
      frontier.pop();
      const std::size_t x = i % w, y = i / w;
      if (x > 0) visit(i, i - 1);
      if (x + 1 < w) visit(i, i + 1);
      if (y > 0) visit(i, i - w);
      if (y + 1 < h) visit(i, i + w);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!out.mask[i]) out.values[i] = 0.0;
  return out;
}

}  // namespace hdrpmp
