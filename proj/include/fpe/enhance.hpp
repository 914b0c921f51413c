#pragma once

#include <cstdint>
#include <limits>

#include "fpe/gabor.hpp"
#include "fpe/raster.hpp"

namespace fpe {

enum class OutputMode {
  Binary,    ///< 1 where the response is > 0, else 0
  Response,  ///< responses min-max normalized to [0, 1] over the foreground
};

enum class FilterStrategy {
  Naive,    ///< per-pixel correlation with the selected kernel
  Grouped,  ///< per bank entry, separable filtering of the pixels assigned to it
};

struct EnhanceOptions {
  OutputMode output_mode = OutputMode::Binary;
  FilterStrategy strategy = FilterStrategy::Grouped;
  int threads = 1;
};

struct FilterIndexTag;
/// Bank index chosen for each pixel; kNoFilter on background.
using FilterIndexMap = Raster<std::uint16_t, FilterIndexTag>;
inline constexpr std::uint16_t kNoFilter = std::numeric_limits<std::uint16_t>::max();

/// select_filter applied at every foreground pixel.
FilterIndexMap assign_filters(const GaborBank& bank, const SegmentationMask& mask,
                              const OrientationField& orientation, const FrequencyMap& frequency);

/// Fingerprint input: inverted so ridges are bright, then centred on the
/// image mean (the centring cancels in zero-mean kernels except for rounding,
/// and makes a constant image respond exactly 0).
RealMap prepare_fingerprint(const GrayImage& image);
/// Skeleton input: nonzero pixels become 1, then centred like the above.
RealMap prepare_skeleton(const GrayImage& skeleton);

/// Raw contextual filter response: at each foreground pixel, the correlation
/// of the selected kernel with `input` (replicate padding) centred on that
/// pixel. Background is 0. Both strategies agree to rounding.
RealMap contextual_response(const RealMap& input, const FilterIndexMap& assignment,
                            const GaborBank& bank, FilterStrategy strategy, int threads = 1);

/// Maps raw responses to the requested output mode; background stays 0.
EnhancedImage finalize_response(const RealMap& response, const SegmentationMask& mask,
                                OutputMode mode);

/// Contextual Gabor enhancement of a fingerprint (dark ridges in, white
/// ridges out). Throws ParameterError on size mismatch or empty mask.
EnhancedImage enhance_gbfen(const GrayImage& image, const SegmentationMask& mask,
                            const OrientationField& orientation, const FrequencyMap& frequency,
                            const GaborBank& bank, const EnhanceOptions& options = {});

/// Same filtering applied to a ridge skeleton (white ridges, not inverted) to
/// synthesize a ground-truth enhanced image.
EnhancedImage gt_enhance(const GrayImage& skeleton, const OrientationField& orientation,
                         const FrequencyMap& frequency, const SegmentationMask& mask,
                         const GaborBank& bank, const EnhanceOptions& options = {});

}  // namespace fpe
