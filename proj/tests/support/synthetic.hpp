#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fpe/minutia.hpp"
#include "fpe/minutiae.hpp"
#include "fpe/raster.hpp"

namespace fpe::test {

/// Dark ridges: I = 128 - amplitude cos(2 pi (x sin t + y cos t) / period + phase).
/// Ridges run along (cos t, -sin t) in image coordinates.
GrayImage sinusoid(int w, int h, double theta, double period, double amplitude = 100.0,
                   double phase = 0.0);

/// 1 where the matching sinusoid is darker than mid-gray (a ridge).
EnhancedImage ridge_indicator(int w, int h, double theta, double period, double phase = 0.0);

SegmentationMask full_mask(int w, int h);
/// Foreground everywhere except a `border`-pixel frame.
SegmentationMask inset_mask(int w, int h, int border);

OrientationField constant_orientation(int w, int h, double theta);
FrequencyMap constant_frequency(int w, int h, double freq);

/// i.i.d. Gaussian noise, rounded and clamped to 0..255.
GrayImage add_noise(const GrayImage& img, double sigma, std::uint64_t seed);

/// Random union of filled discs and rectangles.
BinaryImage random_blobs(int w, int h, std::mt19937_64& rng);

/// 8-connected components of nonzero pixels.
template <typename R>
int count_components(const R& img) {
  std::vector<int> label(img.size(), 0);
  int n = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img(x, y) || label[y * img.width() + x]) continue;
      ++n;
      stack.push_back({x, y});
      label[y * img.width() + x] = n;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (!img.contains(nx, ny) || !img(nx, ny) || label[ny * img.width() + nx]) continue;
            label[ny * img.width() + nx] = n;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }
  return n;
}

/// 8-connected Bresenham segment of ridge pixels.
void draw_line(BinaryImage& img, int x0, int y0, int x1, int y1);

/// Random minutia set inside [0, w) x [0, h).
MinutiaSet random_minutiae(std::mt19937_64& rng, int count, double w, double h);

/// Minutiae with pairwise distances > min_gap, placed by rejection sampling.
MinutiaSet separated_minutiae(std::mt19937_64& rng, int count, double w, double h,
                              double min_gap);

/// Pixels where the two rasters differ.
template <typename R>
std::size_t differing(const R& a, const R& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a.pixels()[i] != b.pixels()[i];
  return n;
}

}  // namespace fpe::test
