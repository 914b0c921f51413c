#include "fpe/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fpe/fields.hpp"

namespace fpe {
namespace {

constexpr double kPi = std::numbers::pi;

// Bit-reproducible draws on top of mt19937_64 (whose sequence is fixed by the
// standard, unlike the distribution classes).
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double symmetric(double half_width) { return (2.0 * unit() - 1.0) * half_width; }
  double in(const Interval& r) { return r.lo + unit() * (r.hi - r.lo); }
  int in(int lo, int hi) {
    const int v = lo + static_cast<int>(unit() * static_cast<double>(hi - lo + 1));
    return std::min(v, hi);
  }
  bool coin() { return unit() < 0.5; }

 private:
  std::mt19937_64 rng_;
};

struct Inverse {
  double cx, cy;
  GeometricTransform t;

  // Source coordinates of destination pixel (qx, qy).
  void map(int qx, int qy, double& px, double& py) const {
    const double dx = qx - cx - t.tx;
    const double dy = qy - cy - t.ty;
    const double c = std::cos(t.rotation), s = std::sin(t.rotation);
    double ux = (c * dx - s * dy) / t.scale;
    const double uy = (s * dx + c * dy) / t.scale;
    if (t.flip) ux = -ux;
    px = cx + ux;
    py = cy + uy;
  }
};

template <typename R>
bool nearest(const R& src, double px, double py, int& ix, int& iy) {
  ix = static_cast<int>(std::floor(px + 0.5));
  iy = static_cast<int>(std::floor(py + 0.5));
  return src.contains(ix, iy);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

float store_orientation(double theta) {
  const float v = static_cast<float>(normalize_orientation(theta));
  return static_cast<double>(v) >= kPi ? 0.0f : v;
}

void gamma_correct(GrayImage& img, double gamma) {
  if (gamma == 1.0) return;
  for (auto& v : img.pixels()) v = to_byte(255.0 * std::pow(v / 255.0, gamma));
}

void reduce_contrast(GrayImage& img, double gain) {
  if (gain == 1.0) return;
  for (auto& v : img.pixels()) v = to_byte(127.5 + gain * (v - 127.5));
}

void morph3x3(GrayImage& img, Morph morph) {
  if (morph == Morph::None) return;
  const GrayImage src = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      std::uint8_t v = src(x, y);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, img.width() - 1);
          const int sy = std::clamp(y + dy, 0, img.height() - 1);
          // Ridges are dark: eroding ridges means a gray-level max.
          v = morph == Morph::Erode ? std::max(v, src(sx, sy)) : std::min(v, src(sx, sy));
        }
      }
      img(x, y) = v;
    }
  }
}

struct Pixel {
  int x, y;
};

void draw_scratch(GrayImage& img, Pixel a, Pixel b, double width, std::uint8_t value) {
  const double half = width / 2.0;
  const int r = static_cast<int>(std::ceil(half));
  const int x0 = std::max(0, std::min(a.x, b.x) - r), x1 = std::min(img.width() - 1, std::max(a.x, b.x) + r);
  const int y0 = std::max(0, std::min(a.y, b.y) - r), y1 = std::min(img.height() - 1, std::max(a.y, b.y) + r);
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double t = len2 > 0.0 ? ((x - a.x) * vx + (y - a.y) * vy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = a.x + t * vx - x, ey = a.y + t * vy - y;
      if (ex * ex + ey * ey <= half * half) img(x, y) = value;
    }
  }
}

void draw_abrasion(GrayImage& img, Pixel c, double semi_a, double semi_b, double angle,
                   double strength, std::uint8_t background) {
  const int r = static_cast<int>(std::ceil(std::max(semi_a, semi_b)));
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = std::max(0, c.y - r); y <= std::min(img.height() - 1, c.y + r); ++y) {
    for (int x = std::max(0, c.x - r); x <= std::min(img.width() - 1, c.x + r); ++x) {
      const double u = (x - c.x) * ca + (y - c.y) * sa;
      const double v = -(x - c.x) * sa + (y - c.y) * ca;
      if ((u * u) / (semi_a * semi_a) + (v * v) / (semi_b * semi_b) > 1.0) continue;
      img(x, y) = to_byte(img(x, y) + strength * (background - img(x, y)));
    }
  }
}

}  // namespace

std::string to_string(Morph morph) {
  switch (morph) {
    case Morph::None: return "none";
    case Morph::Erode: return "erode";
    case Morph::Dilate: return "dilate";
  }
  return "none";
}

Morph parse_morph(const std::string& text) {
  if (text == "none") return Morph::None;
  if (text == "erode") return Morph::Erode;
  if (text == "dilate") return Morph::Dilate;
  throw ParameterError("morph must be none, erode or dilate, got '" + text + "'");
}

void AugmentSpec::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(translate_frac)) throw ParameterError("augment: translate_frac must be >= 0");
  if (!finite_nonneg(scale_frac) || scale_frac >= 1.0) {
    throw ParameterError("augment: scale_frac must be in [0, 1)");
  }
  if (!(rotate_deg >= 0.0 && rotate_deg <= 180.0)) {
    throw ParameterError("augment: rotate_deg must be in [0, 180]");
  }
  if (!(gamma_range.lo > 0.0 && gamma_range.lo <= gamma_range.hi && std::isfinite(gamma_range.hi))) {
    throw ParameterError("augment: gamma_range must satisfy 0 < lo <= hi");
  }
  if (!(contrast_range.lo >= 0.0 && contrast_range.lo <= contrast_range.hi &&
        std::isfinite(contrast_range.hi))) {
    throw ParameterError("augment: contrast_range must satisfy 0 <= lo <= hi");
  }
  for (const auto* c : {&scratches, &abrasions}) {
    if (c->min < 0 || c->min > c->max) {
      throw ParameterError("augment: count ranges must satisfy 0 <= min <= max");
    }
  }
}

AugmentSpec AugmentSpec::identity() {
  AugmentSpec s;
  s.translate_frac = 0.0;
  s.rotate_deg = 0.0;
  s.scale_frac = 0.0;
  s.hflip = false;
  s.gamma_range = {1.0, 1.0};
  s.contrast_range = {1.0, 1.0};
  s.morph = Morph::None;
  s.scratches = {0, 0};
  s.abrasions = {0, 0};
  return s;
}

void Sample::validate() const {
  require_same_size("sample", image, mask, orient, freq);
  if (skeleton) require_same_size("sample", image, *skeleton);
}

bool GeometricTransform::is_identity() const {
  return tx == 0.0 && ty == 0.0 && rotation == 0.0 && scale == 1.0 && !flip;
}

Sample warp_sample(const Sample& sample, const GeometricTransform& t, std::uint8_t fill_value) {
  sample.validate();
  if (!(t.scale > 0.0) || !std::isfinite(t.scale) || !std::isfinite(t.rotation) ||
      !std::isfinite(t.tx) || !std::isfinite(t.ty)) {
    throw ParameterError("warp: transform must be finite with scale > 0");
  }
  if (t.is_identity()) return sample;

  const int w = sample.image.width(), h = sample.image.height();
  const Inverse inv{(w - 1) / 2.0, (h - 1) / 2.0, t};
  Sample out;
  out.image = GrayImage(w, h, fill_value);
  out.mask = SegmentationMask(w, h, 0);
  out.orient = OrientationField(w, h, 0.0f);
  out.freq = FrequencyMap(w, h, 0.0f);
  if (sample.skeleton) out.skeleton = GrayImage(w, h, 0);

  for (int qy = 0; qy < h; ++qy) {
    for (int qx = 0; qx < w; ++qx) {
      double px, py;
      inv.map(qx, qy, px, py);

      const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
      const double fx = px - x0, fy = py - y0;
      const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const int nx[4] = {x0, x0 + 1, x0, x0 + 1};
      const int ny[4] = {y0, y0, y0 + 1, y0 + 1};

      double value = 0.0;
      for (int k = 0; k < 4; ++k) {
        value += wts[k] * (sample.image.contains(nx[k], ny[k]) ? sample.image(nx[k], ny[k])
                                                               : fill_value);
      }
      out.image(qx, qy) = to_byte(value);

      int ix, iy;
      if (!nearest(sample.image, px, py, ix, iy)) continue;
      if (out.skeleton) (*out.skeleton)(qx, qy) = (*sample.skeleton)(ix, iy);
      if (!sample.mask(ix, iy)) continue;
      out.mask(qx, qy) = 1;

      double c2 = 0.0, s2 = 0.0, fsum = 0.0, wsum = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (wts[k] == 0.0 || !sample.mask.contains(nx[k], ny[k]) || !sample.mask(nx[k], ny[k])) {
          continue;
        }
        const double th = sample.orient(nx[k], ny[k]);
        c2 += wts[k] * std::cos(2.0 * th);
        s2 += wts[k] * std::sin(2.0 * th);
        fsum += wts[k] * sample.freq(nx[k], ny[k]);
        wsum += wts[k];
      }
      double theta = sample.orient(ix, iy);
      if (std::hypot(c2, s2) > 1e-12) theta = std::atan2(s2, c2) / 2.0;
      const double freq = wsum > 0.0 ? fsum / wsum : sample.freq(ix, iy);
      out.orient(qx, qy) = store_orientation((t.flip ? kPi - theta : theta) + t.rotation);
      out.freq(qx, qy) = static_cast<float>(freq / t.scale);
    }
  }
  return out;
}

Sample augment(const Sample& sample, const AugmentSpec& spec) {
  spec.validate();
  sample.validate();
  const int w = sample.image.width(), h = sample.image.height();
  Draw draw(spec.seed);

  GeometricTransform t;
  t.tx = draw.symmetric(spec.translate_frac * w);
  t.ty = draw.symmetric(spec.translate_frac * h);
  t.rotation = draw.symmetric(spec.rotate_deg) * kPi / 180.0;
  t.scale = 1.0 + draw.symmetric(spec.scale_frac);
  t.flip = spec.hflip && draw.coin();
  const double gamma = draw.in(spec.gamma_range);
  const double contrast = draw.in(spec.contrast_range);

  Sample out = warp_sample(sample, t, spec.fill_value);
  if (foreground_count(out.mask) == 0) throw Error("empty foreground after augment");

  gamma_correct(out.image, gamma);
  reduce_contrast(out.image, contrast);
  morph3x3(out.image, spec.morph);

  std::vector<Pixel> fg;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (out.mask(x, y)) fg.push_back({x, y});
    }
  }
  auto pick = [&] { return fg[std::min(fg.size() - 1, static_cast<std::size_t>(draw.unit() * fg.size()))]; };

  const int scratches = draw.in(spec.scratches.min, spec.scratches.max);
  for (int i = 0; i < scratches; ++i) {
    const Pixel a = pick(), b = pick();
    const double width = draw.in(1, 3);
    const std::uint8_t value = draw.coin() ? 255 : 0;
    draw_scratch(out.image, a, b, width, value);
  }
  const int abrasions = draw.in(spec.abrasions.min, spec.abrasions.max);
  for (int i = 0; i < abrasions; ++i) {
    const Pixel c = pick();
    const double semi_a = draw.in(Interval{5.0, 25.0}) / 2.0;
    const double semi_b = draw.in(Interval{5.0, 25.0}) / 2.0;
    const double angle = draw.unit() * kPi;
    const double strength = draw.in(Interval{0.5, 0.9});
    draw_abrasion(out.image, c, semi_a, semi_b, angle, strength, spec.fill_value);
  }
  return out;
}

}  // namespace fpe
