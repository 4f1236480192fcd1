#include <gtest/gtest.h>

#include <cmath>

#include "hdrpmp/fringe_model.hpp"
#include "hdrpmp/metrics.hpp"
#include "hdrpmp/unwrap.hpp"

using namespace hdrpmp;

namespace {

PhaseMap wrap(const PhaseMap& m) {
  PhaseMap out = m;
  for (auto& v : out.values) v = wrap_phase(v);
  return out;
}

double multiple_error(const PhaseMap& out, const PhaseMap& in) {
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.valid(i)) continue;
    const double k = (out.values[i] - in.values[i]) / two_pi;
    worst = std::max(worst, std::abs(k - std::round(k)) * two_pi);
  }
  return worst;
}

}  // namespace

TEST(QualityMap, UniformForConstantInput) {
  PhaseMap m(20, 10);
  for (auto& v : m.values) v = 1.3;
  const QualityMap q = quality_map(m, Grid<double>(20, 10, 80.0));
  for (double s : q.scores) EXPECT_DOUBLE_EQ(s, q.scores[0]);
  EXPECT_GT(q.scores[0], 0.0);
}

TEST(QualityMap, ZeroModulationScoresMinimum) {
  PhaseMap m(8, 8);
  Grid<double> b(8, 8, 50.0);
  b(3, 4) = 0.0;
  const QualityMap q = quality_map(m, b);
  EXPECT_EQ(q.scores(3, 4), QualityMap::min_score);
  for (std::size_t i = 0; i < q.scores.size(); ++i) {
    if (i == q.scores.index(3, 4)) continue;
    EXPECT_GT(q.scores[i], QualityMap::min_score);
  }
}

TEST(QualityMap, InvalidPixelsScoreMinimum) {
  PhaseMap m(8, 8);
  m.mask(2, 2) = 0;
  const QualityMap q = quality_map(m, Grid<double>(8, 8, 50.0));
  EXPECT_EQ(q.scores(2, 2), QualityMap::min_score);
}

TEST(QualityMap, LowestAlongWrapLines) {
  const std::size_t n = 256;
  const PhaseMap w = wrap(with_carrier(peaks_phase(n, n), 32.0));
  const QualityMap q = quality_map(w, Grid<double>(n, n, 100.0));
  auto jump = [&](std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
    return std::abs(w.values(x1, y1) - w.values(x0, y0)) > pi;
  };
  // Split interior pixels by whether any difference inside their 3x3 window
  // crosses a wrap line.
  std::vector<double> on, off;
  for (std::size_t y = 1; y + 1 < n; ++y)
    for (std::size_t x = 1; x + 1 < n; ++x) {
      bool crosses = false;
      for (std::size_t v = y - 1; v <= y + 1; ++v)
        for (std::size_t u = x - 1; u <= x + 1; ++u) {
          if (u + 1 < n && jump(u, v, u + 1, v)) crosses = true;
          if (v + 1 < n && jump(u, v, u, v + 1)) crosses = true;
        }
      (crosses ? on : off).push_back(q.scores(x, y));
    }
  ASSERT_FALSE(on.empty());
  ASSERT_FALSE(off.empty());
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  EXPECT_LT(median(on), 0.01 * median(off));
  EXPECT_LT(*std::max_element(on.begin(), on.end()), median(off));
  const auto lowest = std::min_element(q.scores.begin(), q.scores.end());
  const std::size_t i = static_cast<std::size_t>(lowest - q.scores.begin());
  const std::size_t x = i % n, y = i / n;
  EXPECT_TRUE((x + 1 < n && jump(x, y, x + 1, y)) || (x > 0 && jump(x - 1, y, x, y)) ||
              (y + 1 < n && jump(x, y, x, y + 1)) || (y > 0 && jump(x, y - 1, x, y)));
}

TEST(QualityMap, AllInvalidIsEmptyDomain) {
  PhaseMap m(4, 4);
  for (auto& v : m.mask) v = 0;
  try {
    quality_map(m, Grid<double>(4, 4, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_domain);
  }
}

TEST(Unwrap, PeaksRoundTrip) {
  const PhaseMap truth = peaks_phase(512, 512);
  const PhaseMap w = wrap(truth);
  const PhaseMap out = unwrap_quality_guided(w, quality_map(w, Grid<double>(512, 512, 1.0)));
  const RmseResult r = rmse(out, truth, {PhaseComparison::unwrapped, OffsetRemoval::two_pi_multiple});
  EXPECT_LT(r.value, 1e-10);
  EXPECT_EQ(r.pixels, 512u * 512u);
  EXPECT_LT(multiple_error(out, w), 1e-9);
}

TEST(Unwrap, CarrierRoundTrip) {
  const PhaseMap truth = with_carrier(peaks_phase(256, 200), 16.0);
  const PhaseMap w = wrap(truth);
  const PhaseMap out = unwrap_quality_guided(w, quality_map(w, Grid<double>(256, 200, 1.0)));
  EXPECT_LT(rmse(out, truth, {PhaseComparison::unwrapped, OffsetRemoval::two_pi_multiple}).value, 1e-10);
}

TEST(Unwrap, ConstantStaysConstant) {
  PhaseMap m(16, 9);
  for (auto& v : m.values) v = -2.5;
  const PhaseMap out = unwrap_quality_guided(m, quality_map(m, Grid<double>(16, 9, 3.0)));
  for (double v : out.values) EXPECT_EQ(v, -2.5);
}

TEST(Unwrap, DisconnectedRegionsAreEachConsistent) {
  const std::size_t w = 64, h = 32;
  PhaseMap truth(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) truth.values(x, y) = 0.4 * x + 0.1 * y;
  for (std::size_t y = 0; y < h; ++y) truth.mask(31, y) = truth.mask(32, y) = 0;
  PhaseMap wrapped = wrap(truth);
  const PhaseMap out = unwrap_quality_guided(wrapped, quality_map(wrapped, Grid<double>(w, h, 1.0)));
  for (auto [x0, x1] : {std::pair<std::size_t, std::size_t>{0, 31}, {33, 64}}) {
    const double offset = out.values(x0, 0) - truth.values(x0, 0);
    EXPECT_NEAR(std::remainder(offset, two_pi), 0.0, 1e-9);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = x0; x < x1; ++x) EXPECT_NEAR(out.values(x, y) - truth.values(x, y), offset, 1e-9);
  }
  EXPECT_EQ(out.mask(31, 5), 0);
}

TEST(Unwrap, OrderPreservingQualityGivesSameOutput) {
  const PhaseMap truth = with_carrier(peaks_phase(128, 128), 24.0);
  PhaseMap w = wrap(truth);
  // Punch holes so the flood has genuine path choices.
  for (std::size_t y = 30; y < 60; ++y)
    for (std::size_t x = 50; x < 58; ++x) w.mask(x, y) = 0;
  const QualityMap q = quality_map(w, Grid<double>(128, 128, 10.0));
  QualityMap q2 = q;
  for (auto& s : q2.scores) s = std::sqrt(s) * 3.0 + 1.0;
  const PhaseMap a = unwrap_quality_guided(w, q), b = unwrap_quality_guided(w, q2);
  EXPECT_TRUE(a.values == b.values);
  EXPECT_LT(multiple_error(a, w), 1e-9);
}

TEST(Unwrap, TiesStartAtLowestIndex) {
  PhaseMap m(5, 5);
  for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = wrap_phase(1.7 * static_cast<double>(i % 5));
  QualityMap q{Grid<double>(5, 5, 1.0)};
  const PhaseMap out = unwrap_quality_guided(m, q);
  EXPECT_EQ(out.values[0], m.values[0]);
  const PhaseMap again = unwrap_quality_guided(m, q);
  EXPECT_TRUE(out.values == again.values);
}

TEST(Unwrap, ShapeMismatchThrows) {
  PhaseMap m(5, 5);
  EXPECT_THROW(unwrap_quality_guided(m, QualityMap{Grid<double>(4, 5, 1.0)}), Error);
}
