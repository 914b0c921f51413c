#pragma once

#include <cstddef>

#include "fpe/raster.hpp"

namespace fpe {

/// Squared-gradient orientation estimator settings.
struct OrientationParams {
  int gradient_window = 33;       ///< odd, >= 3; averaging window in pixels
  double coherence_floor = 0.1;   ///< [0, 1); below it the angle is propagated from neighbours

  void validate() const;
};

/// Dense ridge orientation from averaged squared gradients.
///
/// Pixels whose gradient coherence falls below `coherence_floor` take the
/// angle of the nearest coherent pixel (4-connected breadth-first search
/// seeded in raster order). Throws ParameterError on size mismatch or an
/// empty mask, and Error when no foreground pixel is coherent (for example a
/// constant image).
OrientationField estimate_orientation(const GrayImage& image, const SegmentationMask& mask,
                                      const OrientationParams& params = {});

/// Gradient coherence in [0, 1] used by estimate_orientation; 0 where the
/// image is locally flat.
RealMap orientation_coherence(const GrayImage& image, const OrientationParams& params = {});

struct DoubleAngle {
  RealMap x;  ///< cos(2 theta)
  RealMap y;  ///< sin(2 theta)
};

DoubleAngle double_angle_encode(const OrientationField& field);

/// Inverse of double_angle_encode, theta = atan2(y, x) / 2 mapped into
/// [0, pi). A zero vector anywhere is an "undefined orientation" error.
OrientationField double_angle_decode(const RealMap& x, const RealMap& y);

/// As above, but zero vectors are only an error on foreground pixels;
/// background pixels with a zero vector decode to 0.
OrientationField double_angle_decode(const RealMap& x, const RealMap& y,
                                     const SegmentationMask& mask);

/// Circular distance between two orientations (period pi), in [0, pi/2].
double orientation_distance(double a, double b);

/// Maps any finite angle into [0, pi).
double normalize_orientation(double radians);

/// Ridge-frequency estimator settings (oriented-window x-signature).
struct FrequencyParams {
  int window_length = 64;    ///< samples across the ridges
  int window_width = 16;     ///< samples along the ridges averaged per signature entry
  double min_period = 5.0;   ///< pixels
  double max_period = 13.0;  ///< pixels
  int grid_step = 8;         ///< spacing of measurement windows in pixels

  void validate() const;
};

struct FrequencyDiagnostics {
  std::size_t measured = 0;      ///< windows or pixels with a direct measurement
  std::size_t interpolated = 0;  ///< filled from valid neighbours
  bool used_fallback = false;    ///< nothing measurable; constant mid-range value used
};

/// Dense ridge frequency (cycles/pixel) from x-signatures taken on a grid of
/// oriented windows. Windows without a reliable period are filled by
/// iterative 3x3 averaging of valid neighbours, then the grid is bilinearly
/// interpolated to every pixel. Foreground values lie in
/// [1/max_period, 1/min_period]; background is 0.
FrequencyMap estimate_frequency(const GrayImage& image, const SegmentationMask& mask,
                                const OrientationField& orientation,
                                const FrequencyParams& params = {},
                                FrequencyDiagnostics* diagnostics = nullptr);

/// Ground-truth frequency from a ridge skeleton (nonzero = ridge pixel).
///
/// At every foreground pixel the line through it, normal to the local
/// orientation and `window_length` long, is walked pixel by pixel; the
/// skeleton crossings along it give the mean ridge spacing. Pixels with
/// fewer than two crossings are filled like estimate_frequency's windows.
/// Values are clamped to [1/max_period, 1/min_period].
FrequencyMap frequency_from_skeleton(const GrayImage& skeleton, const OrientationField& orientation,
                                     const SegmentationMask& mask,
                                     const FrequencyParams& params = {},
                                     FrequencyDiagnostics* diagnostics = nullptr);

}  // namespace fpe
