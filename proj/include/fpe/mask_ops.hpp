#pragma once

#include <cstdint>

#include "fpe/raster.hpp"

namespace fpe {

struct SquaredDistanceTag;
using SquaredDistanceMap = Raster<std::int64_t, SquaredDistanceTag>;

/// Exact squared Euclidean distance from every pixel to the nearest background
/// pixel. Pixels outside the frame count as background, so a foreground pixel
/// at column 0 has distance 1. Background pixels map to 0.
SquaredDistanceMap squared_distance_to_background(const SegmentationMask& mask);

/// Keeps the foreground pixels whose distance to every background pixel
/// (the frame border included) is strictly greater than `radius`.
/// radius 0 returns the input unchanged; radius < 0 is a ParameterError.
SegmentationMask erode_mask(const SegmentationMask& mask, double radius);

}  // namespace fpe
