#pragma once

#include <numbers>
#include <vector>

namespace fpe {

enum class MinutiaKind { Ending, Bifurcation };

/// A ridge ending or bifurcation. Direction is in radians, [0, 2pi), measured
/// counter-clockwise as displayed (y axis up) like the orientation field.
struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double direction = 0.0;
  MinutiaKind kind = MinutiaKind::Ending;

  bool operator==(const Minutia&) const = default;
};

using MinutiaSet = std::vector<Minutia>;

/// Maps any finite angle into [0, 2pi).
double normalize_direction(double radians);

/// Circular distance between two directions, in [0, pi].
double direction_distance(double a, double b);

}  // namespace fpe
