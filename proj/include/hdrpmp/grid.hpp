#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"

namespace hdrpmp {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Maps an angle to (-pi, pi].
inline double wrap_phase(double angle) noexcept {
  double r = std::remainder(angle, two_pi);
  if (r <= -pi) r += two_pi;
  return r;
}

/// Dense row-major image.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t x, std::size_t y) const noexcept { return y * width_ + x; }

  T& operator()(std::size_t x, std::size_t y) noexcept { return data_[index(x, y)]; }
  const T& operator()(std::size_t x, std::size_t y) const noexcept { return data_[index(x, y)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::span<T> row(std::size_t y) noexcept { return std::span<T>(data_).subspan(y * width_, width_); }
  std::span<const T> row(std::size_t y) const noexcept {
    return std::span<const T>(data_).subspan(y * width_, width_);
  }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;

/// Real-valued phase image in radians with a per-pixel validity mask.
struct PhaseMap {
  Grid<double> values;
  Mask mask;

  PhaseMap() = default;
  PhaseMap(std::size_t width, std::size_t height)
      : values(width, height, 0.0), mask(width, height, std::uint8_t{1}) {}
  PhaseMap(Grid<double> v, Mask m) : values(std::move(v)), mask(std::move(m)) { validate(); }

  std::size_t width() const noexcept { return values.width(); }
  std::size_t height() const noexcept { return values.height(); }
  std::size_t size() const noexcept { return values.size(); }
  bool valid(std::size_t i) const noexcept { return mask[i] != 0; }

  std::size_t valid_count() const noexcept {
    std::size_t n = 0;
    for (auto m : mask) n += (m != 0);
    return n;
  }

  void validate() const {
    if (!values.same_shape(mask))
      throw Error(ErrorCode::invalid_argument, "phase map values and mask differ in shape");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (mask[i] && !std::isfinite(values[i]))
        throw Error(ErrorCode::invalid_argument, "non-finite phase at a valid pixel");
    }
  }
};

}  // namespace hdrpmp
