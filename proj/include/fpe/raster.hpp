#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpe/error.hpp"

namespace fpe {

/// Dense row-major 2-D array. The Tag parameter keeps semantically different
/// rasters (an image, a mask, an orientation field) from being mixed up even
/// when they share a pixel type.
template <typename T, typename Tag>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw ParameterError("raster buffer length does not match " + std::to_string(width) +
                           "x" + std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  std::span<T> row(int y) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  template <typename OtherT, typename OtherTag>
  bool same_size(const Raster<OtherT, OtherTag>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
      throw ParameterError("raster dimensions must be positive, got " + std::to_string(width) +
                           "x" + std::to_string(height));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct GrayTag;
struct MaskTag;
struct OrientationTag;
struct FrequencyTag;
struct EnhancedTag;
struct RealTag;

/// 8-bit grayscale, 0 = black, 255 = white.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Per-pixel foreground flags stored as 0/1.
using SegmentationMask = Raster<std::uint8_t, MaskTag>;
/// Ridge orientation in radians, [0, pi). 0 is a horizontal ridge, pi/2 a
/// vertical one; angles grow counter-clockwise as displayed (y axis up).
using OrientationField = Raster<float, OrientationTag>;
/// Ridge frequency in cycles/pixel; 0 on background.
using FrequencyMap = Raster<float, FrequencyTag>;
/// Enhancement output in [0, 1], 1 = ridge.
using EnhancedImage = Raster<float, EnhancedTag>;
/// Scratch real-valued map (responses, double-angle components).
using RealMap = Raster<double, RealTag>;

std::size_t foreground_count(const SegmentationMask& mask);

/// Throws ParameterError naming `what` unless every raster shares a's size.
template <typename A, typename... Rest>
void require_same_size(const char* what, const A& a, const Rest&... rest) {
  if (!(a.same_size(rest) && ...)) {
    throw ParameterError(std::string(what) + ": raster dimensions differ");
  }
}

/// Throws ParameterError("<what>: empty mask") if no pixel is foreground.
void require_foreground(const char* what, const SegmentationMask& mask);

}  // namespace fpe
