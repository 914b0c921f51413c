#pragma once

#include <array>
#include <cstdint>

#include "fpe/minutia.hpp"
#include "fpe/raster.hpp"

namespace fpe {

struct BinaryTag;
struct SkeletonTag;
/// Ridge flags (1 = ridge) before thinning.
using BinaryImage = Raster<std::uint8_t, BinaryTag>;
/// Thinned ridge flags: no pixel with two or more ridge neighbours can be
/// removed without changing local 8-connectivity.
using SkeletonImage = Raster<std::uint8_t, SkeletonTag>;

/// value >= threshold -> ridge.
BinaryImage binarize(const EnhancedImage& enhanced, double threshold = 0.5);

/// Zhang-Suen thinning in which every deletion is re-checked to be a simple
/// point, followed by removal of remaining redundant (simple, non-end)
/// pixels. Preserves the 8-connected component count; idempotent.
SkeletonImage thin(const BinaryImage& binary);

/// Nonzero pixels of a grayscale skeleton drawing become ridge pixels.
SkeletonImage skeleton_from_gray(const GrayImage& image);
GrayImage skeleton_to_gray(const SkeletonImage& skeleton);

/// Neighbours of (x, y) in the cyclic order N, NE, E, SE, S, SW, W, NW;
/// pixels outside the raster read as 0.
std::array<std::uint8_t, 8> neighbourhood(const SkeletonImage& skeleton, int x, int y);

/// Half the number of 0/1 transitions around the 8-neighbour cycle.
int crossing_number(const SkeletonImage& skeleton, int x, int y);

/// Whether removing a ridge pixel with this neighbourhood leaves local
/// topology unchanged (one 8-connected ridge component and one 4-connected
/// background component among the neighbours).
bool is_simple(const std::array<std::uint8_t, 8>& neighbours);

bool is_thin(const SkeletonImage& skeleton);

struct DetectParams {
  int min_spur = 8;     ///< branches (and isolated fragments) shorter than this are pruned
  int trace_steps = 8;  ///< skeleton steps traced to measure a direction
};

/// Crossing-number minutiae: CN 1 -> ending, CN 3 -> bifurcation.
///
/// Endings point along the ridge away from the ending. Bifurcations take the
/// mean of the two closest branch directions, rotated by pi. Minutiae
/// outside the mask are dropped. Throws ParameterError("skeleton not thin")
/// when the input violates the thinness invariant.
MinutiaSet detect_minutiae(const SkeletonImage& skeleton, const SegmentationMask& mask,
                           const DetectParams& params = {});

/// binarize -> thin -> detect_minutiae.
MinutiaSet extract_minutiae(const EnhancedImage& enhanced, const SegmentationMask& mask,
                            const DetectParams& params = {}, double threshold = 0.5);

}  // namespace fpe
