#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fpe {

/// Standardized (zero-mean, unit L2 norm) Gabor kernel.
///
/// Before standardization the weight at integer offset (x, y) is
///   exp(-(xt^2 + yt^2) / (2 sigma^2)) * cos(2 pi f xt),
///   xt = x sin(theta) + y cos(theta),  yt = -x cos(theta) + y sin(theta),
/// with sigma = 5 / (12 f) and side 1 + 2 ceil(3 sigma).
struct GaborKernel {
  double theta = 0.0;
  double freq = 0.0;
  double sigma = 0.0;
  int size = 0;
  /// size*size, row-major, weights[(dy + r) * size + (dx + r)].
  std::vector<double> weights;

  // The raw kernel factors as cx(x)cy(y) - sx(x)sy(y); the standardized one
  // is (raw - mean) / norm. Used by the separable filtering path.
  std::vector<double> cos_x, cos_y, sin_x, sin_y;
  double mean = 0.0;
  double norm = 1.0;

  int radius() const { return size / 2; }
  double at(int dx, int dy) const {
    return weights[static_cast<std::size_t>(dy + radius()) * size + (dx + radius())];
  }
};

double gabor_sigma(double freq);
int gabor_size(double freq);

/// theta in [0, pi), freq in (0, 0.5); otherwise ParameterError.
GaborKernel gabor_kernel(double theta, double freq);

/// Pre-computed bank over a uniform orientation grid (theta_i = i pi / n)
/// and a set of frequencies. Kernels are stored orientation-major with
/// frequencies ascending.
class GaborBank {
 public:
  static std::vector<double> default_periods();

  /// Defaults give 16 orientations x 9 periods (5..13 px) = 144 kernels.
  static GaborBank build(int orientation_count = 16,
                         const std::vector<double>& periods = default_periods());

  std::size_t size() const { return kernels_.size(); }
  std::size_t orientation_count() const { return orientations_.size(); }
  std::size_t frequency_count() const { return frequencies_.size(); }
  std::span<const double> orientations() const { return orientations_; }
  std::span<const double> frequencies() const { return frequencies_; }
  const GaborKernel& kernel(std::size_t index) const { return kernels_.at(index); }
  std::span<const GaborKernel> kernels() const { return kernels_; }

  std::size_t index(std::size_t orientation, std::size_t frequency) const {
    return orientation * frequencies_.size() + frequency;
  }
  std::size_t orientation_of(std::size_t index) const { return index / frequencies_.size(); }
  std::size_t frequency_of(std::size_t index) const { return index % frequencies_.size(); }

  /// Nearest orientation by circular distance (mod pi), then nearest
  /// frequency; ties go to the lower index. Frequencies outside the bank
  /// clamp to the nearest end.
  std::size_t select(double theta, double freq) const;

 private:
  std::vector<double> orientations_;
  std::vector<double> frequencies_;
  std::vector<GaborKernel> kernels_;
};

inline std::size_t select_filter(const GaborBank& bank, double theta, double freq) {
  return bank.select(theta, freq);
}

}  // namespace fpe
