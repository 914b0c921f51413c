#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fpe/raster.hpp"

namespace fpe {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CountRange {
  int min = 0;
  int max = 0;
};

enum class Morph { None, Erode, Dilate };

std::string to_string(Morph morph);
Morph parse_morph(const std::string& text);

/// Random augmentation ranges. Geometric draws are uniform in [-x, x]; flip
/// (when enabled) happens with probability 1/2.
struct AugmentSpec {
  double translate_frac = 0.05;  ///< of width / height
  double rotate_deg = 20.0;
  double scale_frac = 0.15;
  bool hflip = true;
  Interval gamma_range{0.7, 1.4};
  Interval contrast_range{0.6, 1.0};  ///< gain about mid-gray; < 1 reduces contrast
  Morph morph = Morph::None;
  CountRange scratches{0, 3};
  CountRange abrasions{0, 2};
  std::uint64_t seed = 0;
  std::uint8_t fill_value = 255;  ///< image value uncovered by the warp

  void validate() const;

  /// No geometric or photometric change at all.
  static AugmentSpec identity();
};

struct Sample {
  GrayImage image;
  SegmentationMask mask;
  OrientationField orient;
  FrequencyMap freq;
  std::optional<GrayImage> skeleton;

  /// Throws ParameterError unless all rasters share one size.
  void validate() const;
};

/// Destination pixel q maps from source p as
///   q = c + t + scale * R(rotation) * F(p - c),
/// c the image centre, F the optional mirror x -> -x, and R a rotation that is
/// counter-clockwise as displayed.
struct GeometricTransform {
  double tx = 0.0;
  double ty = 0.0;
  double rotation = 0.0;  ///< radians
  double scale = 1.0;
  bool flip = false;

  bool is_identity() const;
};

/// Applies `t` to every raster: bilinear for the image, nearest for the mask
/// and skeleton, mask-restricted bilinear for the fields (orientation in
/// double-angle space). Orientation becomes ((flip ? pi - theta : theta) +
/// rotation) mod pi and frequency f / scale.
Sample warp_sample(const Sample& sample, const GeometricTransform& t,
                   std::uint8_t fill_value = 255);

/// Draws a transform and photometric changes from spec.seed and applies them.
/// Photometric changes (gamma, contrast, morphology, scratches, abrasions)
/// touch the image only. Throws Error("empty foreground after augment") when
/// no foreground remains in frame.
Sample augment(const Sample& sample, const AugmentSpec& spec);

}  // namespace fpe
