#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpe/minutia.hpp"
#include "fpe/raster.hpp"

namespace fpe::io {

// 8-bit grayscale PNG. Colour or 16-bit inputs are converted to 8-bit gray.
GrayImage read_gray_png(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const GrayImage& image);

// Mask PNG: pixels >= 128 are foreground; written as 0/255.
SegmentationMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const SegmentationMask& mask);

// [0,1] values scaled to 0..255 with rounding.
void write_enhanced_png(const std::filesystem::path& path, const EnhancedImage& image);
GrayImage to_gray(const EnhancedImage& image);
SegmentationMask mask_from_gray(const GrayImage& image);

// Binary field layout: 4-byte magic, u32 LE width, u32 LE height, then
// width*height float32 LE values in row-major order.
inline constexpr std::string_view kOrientationMagic = "OFD1";
inline constexpr std::string_view kFrequencyMagic = "FQM1";

std::vector<std::uint8_t> encode_orientation(const OrientationField& field);
std::vector<std::uint8_t> encode_frequency(const FrequencyMap& field);
OrientationField decode_orientation(std::span<const std::uint8_t> bytes);
FrequencyMap decode_frequency(std::span<const std::uint8_t> bytes);

OrientationField read_orientation(const std::filesystem::path& path);
void write_orientation(const std::filesystem::path& path, const OrientationField& field);
FrequencyMap read_frequency(const std::filesystem::path& path);
void write_frequency(const std::filesystem::path& path, const FrequencyMap& field);

// Minutiae text: "MIN1 <count>" then "<x> <y> <direction> <E|B>" per line.
std::string format_minutiae(const MinutiaSet& minutiae);
MinutiaSet parse_minutiae(std::string_view text);
MinutiaSet read_minutiae(const std::filesystem::path& path);
void write_minutiae(const std::filesystem::path& path, const MinutiaSet& minutiae);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace fpe::io
