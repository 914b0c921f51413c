#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

#include "fpe/fields.hpp"

namespace fpe {
namespace {

constexpr double kPi = std::numbers::pi;

struct GradientMoments {
  RealMap xx, yy, xy;
};

// Scharr gradients (3-10-3 smoothing, less anisotropic than Sobel at short
// periods), replicate border.
void scharr(const GrayImage& image, RealMap& gx, RealMap& gy) {
  const int w = image.width();
  const int h = image.height();
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return static_cast<double>(image(x, y));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = at(x - 1, y - 1), b = at(x, y - 1), c = at(x + 1, y - 1);
      const double d = at(x - 1, y), f = at(x + 1, y);
      const double g = at(x - 1, y + 1), hh = at(x, y + 1), i = at(x + 1, y + 1);
      gx(x, y) = (3 * c + 10 * f + 3 * i) - (3 * a + 10 * d + 3 * g);
      gy(x, y) = (3 * g + 10 * hh + 3 * i) - (3 * a + 10 * b + 3 * c);
    }
  }
}

// Clipped box sum, separable, summed directly so flat regions stay exactly 0.
RealMap box_sum(const RealMap& in, int radius) {
  const int w = in.width();
  const int h = in.height();
  RealMap tmp(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius); ++k) s += in(k, y);
      tmp(x, y) = s;
    }
  }
  RealMap out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius); ++k) s += tmp(x, k);
      out(x, y) = s;
    }
  }
  return out;
}

GradientMoments averaged_moments(const GrayImage& image, int window) {
  const int w = image.width();
  const int h = image.height();
  RealMap gx(w, h), gy(w, h);
  scharr(image, gx, gy);
  RealMap xx(w, h), yy(w, h), xy(w, h);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double a = gx.pixels()[i];
    const double b = gy.pixels()[i];
    xx.pixels()[i] = a * a;
    yy.pixels()[i] = b * b;
    xy.pixels()[i] = a * b;
  }
  const int r = window / 2;
  return {box_sum(xx, r), box_sum(yy, r), box_sum(xy, r)};
}

}  // namespace

void OrientationParams::validate() const {
  if (gradient_window < 3 || gradient_window % 2 == 0) {
    throw ParameterError("OrientationParams: gradient_window must be odd and >= 3");
  }
  if (!(coherence_floor >= 0.0 && coherence_floor < 1.0)) {
    throw ParameterError("OrientationParams: coherence_floor must be in [0, 1)");
  }
}

double normalize_orientation(double radians) {
  double a = std::fmod(radians, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a = 0.0;
  return a;
}

double orientation_distance(double a, double b) {
  const double d = std::fabs(normalize_orientation(a) - normalize_orientation(b));
  return std::min(d, kPi - d);
}

RealMap orientation_coherence(const GrayImage& image, const OrientationParams& params) {
  params.validate();
  const auto m = averaged_moments(image, params.gradient_window);
  RealMap coh(image.width(), image.height(), 0.0);
  for (std::size_t i = 0; i < coh.size(); ++i) {
    const double sxx = m.xx.pixels()[i], syy = m.yy.pixels()[i], sxy = m.xy.pixels()[i];
    const double energy = sxx + syy;
    if (energy > 0.0) {
      coh.pixels()[i] = std::hypot(sxx - syy, 2.0 * sxy) / energy;
    }
  }
  return coh;
}

OrientationField estimate_orientation(const GrayImage& image, const SegmentationMask& mask,
                                      const OrientationParams& params) {
  params.validate();
  require_same_size("estimate_orientation", image, mask);
  require_foreground("estimate_orientation", mask);

  const int w = image.width();
  const int h = image.height();
  const auto m = averaged_moments(image, params.gradient_window);

  OrientationField field(w, h, 0.0f);
  std::vector<std::uint8_t> coherent(field.size(), 0);
  std::deque<int> queue;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double sxx = m.xx.pixels()[i], syy = m.yy.pixels()[i], sxy = m.xy.pixels()[i];
    const double energy = sxx + syy;
    // The gradient is normal to the ridge: ridge angle theta has gradient
    // direction (sin theta, cos theta) in image coordinates, so
    // cos 2theta ~ (syy - sxx) and sin 2theta ~ 2 sxy.
    const double theta = normalize_orientation(0.5 * std::atan2(2.0 * sxy, syy - sxx));
    field.pixels()[i] = static_cast<float>(theta);
    // float(pi) rounds above pi; keep stored angles strictly inside [0, pi).
    if (static_cast<double>(field.pixels()[i]) >= kPi) field.pixels()[i] = 0.0f;
    if (energy > 0.0) {
      const double coh = std::hypot(sxx - syy, 2.0 * sxy) / energy;
      if (coh > 0.0 && coh >= params.coherence_floor) {
        coherent[i] = 1;
        queue.push_back(static_cast<int>(i));
      }
    }
  }
  bool any_foreground_coherent = false;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (coherent[i] && mask.pixels()[i]) {
      any_foreground_coherent = true;
      break;
    }
  }
  if (!any_foreground_coherent) {
    throw Error("estimate_orientation: no coherent orientation in the foreground");
  }

  // Multi-source BFS: each incoherent pixel inherits the angle of the
  // coherent pixel that reaches it first.
  std::vector<std::uint8_t> reached = coherent;
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    const int x = i % w;
    const int y = i / w;
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (!field.contains(nx, ny)) continue;
      const int j = ny * w + nx;
      if (reached[j]) continue;
      reached[j] = 1;
      field.pixels()[j] = field.pixels()[i];
      queue.push_back(j);
    }
  }
  return field;
}

DoubleAngle double_angle_encode(const OrientationField& field) {
  DoubleAngle out{RealMap(field.width(), field.height()), RealMap(field.width(), field.height())};
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double t = 2.0 * static_cast<double>(field.pixels()[i]);
    out.x.pixels()[i] = std::cos(t);
    out.y.pixels()[i] = std::sin(t);
  }
  return out;
}

namespace {

OrientationField decode_impl(const RealMap& x, const RealMap& y, const SegmentationMask* mask) {
  require_same_size("double_angle_decode", x, y);
  if (mask) require_same_size("double_angle_decode", x, *mask);
  OrientationField out(x.width(), x.height(), 0.0f);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double vx = x.pixels()[i];
    const double vy = y.pixels()[i];
    if (vx == 0.0 && vy == 0.0) {
      if (!mask || mask->pixels()[i]) {
        throw ParameterError("double_angle_decode: undefined orientation at pixel (" +
                             std::to_string(i % x.width()) + ", " +
                             std::to_string(i / x.width()) + ")");
      }
      continue;
    }
    float theta = static_cast<float>(normalize_orientation(0.5 * std::atan2(vy, vx)));
    if (static_cast<double>(theta) >= kPi) theta = 0.0f;
    out.pixels()[i] = theta;
  }
  return out;
}

}  // namespace

OrientationField double_angle_decode(const RealMap& x, const RealMap& y) {
  return decode_impl(x, y, nullptr);
}

OrientationField double_angle_decode(const RealMap& x, const RealMap& y,
                                     const SegmentationMask& mask) {
  return decode_impl(x, y, &mask);
}

}  // namespace fpe
