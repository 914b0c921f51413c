#include "fpe/raster.hpp"

#include <algorithm>
#include <cmath>

#include "fpe/minutia.hpp"

namespace fpe {

std::size_t foreground_count(const SegmentationMask& mask) {
  const auto px = mask.pixels();
  return static_cast<std::size_t>(std::count_if(px.begin(), px.end(), [](auto v) { return v != 0; }));
}

void require_foreground(const char* what, const SegmentationMask& mask) {
  if (mask.empty() || foreground_count(mask) == 0) {
    throw ParameterError(std::string(what) + ": empty mask");
  }
}

double normalize_direction(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a < 0.0) a += two_pi;
  // fmod of a tiny negative value plus 2pi can round up to exactly 2pi.
  if (a >= two_pi) a = 0.0;
  return a;
}

double direction_distance(double a, double b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double d = std::fabs(normalize_direction(a) - normalize_direction(b));
  return std::min(d, two_pi - d);
}

}  // namespace fpe
