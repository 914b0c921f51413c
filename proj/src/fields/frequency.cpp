#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fpe/fields.hpp"

namespace fpe {
namespace {

struct ValidityTag;
using ValidityMap = Raster<std::uint8_t, ValidityTag>;

// Iterative 3x3 mean of valid neighbours: each pass fills every invalid cell
// that touches a valid one, using only values valid before the pass.
// Returns the number of cells filled; leaves everything untouched when no
// cell is valid.
std::size_t fill_from_neighbours(RealMap& values, ValidityMap& valid) {
  const int w = values.width();
  const int h = values.height();
  std::vector<std::uint8_t> queued(valid.size(), 0);
  std::vector<int> frontier;
  auto enqueue_neighbours = [&](int x, int y, std::vector<int>& into) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (!valid.contains(nx, ny) || valid(nx, ny)) continue;
        const int j = ny * w + nx;
        if (!queued[j]) {
          queued[j] = 1;
          into.push_back(j);
        }
      }
    }
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (valid(x, y)) enqueue_neighbours(x, y, frontier);
    }
  }

  std::size_t filled = 0;
  std::vector<double> next;
  std::vector<int> upcoming;
  while (!frontier.empty()) {
    // Raster order keeps the result independent of discovery order.
    std::sort(frontier.begin(), frontier.end());
    next.assign(frontier.size(), 0.0);
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      const int x = frontier[k] % w;
      const int y = frontier[k] / w;
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (valid.contains(x + dx, y + dy) && valid(x + dx, y + dy)) {
            sum += values(x + dx, y + dy);
            ++n;
          }
        }
      }
      next[k] = sum / n;
    }
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      values.pixels()[frontier[k]] = next[k];
      valid.pixels()[frontier[k]] = 1;
    }
    filled += frontier.size();
    upcoming.clear();
    for (int j : frontier) enqueue_neighbours(j % w, j / w, upcoming);
    frontier.swap(upcoming);
  }
  return filled;
}

double bilinear(const GrayImage& img, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const int y0 = std::min(static_cast<int>(y), h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
  const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

// Period of a 1-D signature from its hysteresis zero crossings, or NaN when
// no reliable periodicity is present.
double signature_period(std::vector<double>& sig) {
  const double mean = std::accumulate(sig.begin(), sig.end(), 0.0) / static_cast<double>(sig.size());
  double var = 0.0;
  for (auto& v : sig) {
    v -= mean;
    var += v * v;
  }
  const double stddev = std::sqrt(var / static_cast<double>(sig.size()));
  if (stddev < 1.0) return std::nan("");

  // [1 2 1] smoothing suppresses sample-level noise without moving crossings
  // of a symmetric profile.
  std::vector<double> s(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const double a = sig[i == 0 ? 0 : i - 1];
    const double c = sig[i + 1 == sig.size() ? i : i + 1];
    s[i] = 0.25 * a + 0.5 * sig[i] + 0.25 * c;
  }

  const double hyst = 0.25 * stddev;
  std::vector<double> crossings;
  int state = 0;
  std::size_t last_confirmed = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    int now = 0;
    if (s[i] > hyst) now = 1;
    if (s[i] < -hyst) now = -1;
    if (now == 0) continue;
    if (state != 0 && now != state) {
      // Locate the sign change between the last confirmed sample and i.
      for (std::size_t j = i; j > last_confirmed; --j) {
        const double a = s[j - 1];
        const double b = s[j];
        if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0)) {
          crossings.push_back(static_cast<double>(j - 1) + a / (a - b));
          break;
        }
      }
    }
    state = now;
    last_confirmed = i;
  }
  if (crossings.size() < 3) return std::nan("");
  // Two crossings per period.
  return 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

FrequencyMap finish(RealMap period_grid, ValidityMap valid, const SegmentationMask& mask,
                    const FrequencyParams& params, int step, bool dense,
                    FrequencyDiagnostics* diagnostics) {
  FrequencyDiagnostics diag;
  diag.measured = static_cast<std::size_t>(
      std::count(valid.pixels().begin(), valid.pixels().end(), std::uint8_t{1}));
  diag.interpolated = fill_from_neighbours(period_grid, valid);
  const double fallback_period = 0.5 * (params.min_period + params.max_period);
  if (diag.measured == 0) {
    diag.used_fallback = true;
    std::fill(period_grid.pixels().begin(), period_grid.pixels().end(), fallback_period);
  }
  if (diagnostics) *diagnostics = diag;

  // Float bounds rounded inward so stored values stay inside the exact range.
  float lo = static_cast<float>(1.0 / params.max_period);
  if (static_cast<double>(lo) < 1.0 / params.max_period) lo = std::nextafter(lo, 1.0f);
  float hi = static_cast<float>(1.0 / params.min_period);
  if (static_cast<double>(hi) > 1.0 / params.min_period) hi = std::nextafter(hi, 0.0f);
  FrequencyMap out(mask.width(), mask.height(), 0.0f);
  const int gw = period_grid.width();
  const int gh = period_grid.height();
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      double period = 0.0;
      if (dense) {
        period = period_grid(x, y);
      } else {
        // Grid cell k is centred at k*step + step/2.
        const double gx = std::clamp((x - step / 2) / static_cast<double>(step), 0.0, gw - 1.0);
        const double gy = std::clamp((y - step / 2) / static_cast<double>(step), 0.0, gh - 1.0);
        const int x0 = std::min(static_cast<int>(gx), gw - 1);
        const int y0 = std::min(static_cast<int>(gy), gh - 1);
        const int x1 = std::min(x0 + 1, gw - 1);
        const int y1 = std::min(y0 + 1, gh - 1);
        const double fx = gx - x0;
        const double fy = gy - y0;
        period = (period_grid(x0, y0) * (1 - fx) + period_grid(x1, y0) * fx) * (1 - fy) +
                 (period_grid(x0, y1) * (1 - fx) + period_grid(x1, y1) * fx) * fy;
      }
      out(x, y) = std::clamp(static_cast<float>(1.0 / period), lo, hi);
    }
  }
  return out;
}

}  // namespace

void FrequencyParams::validate() const {
  if (!(min_period >= 2.0 && min_period < max_period)) {
    throw ParameterError("FrequencyParams: require 2 <= min_period < max_period");
  }
  if (window_length < 2.0 * max_period) {
    throw ParameterError("FrequencyParams: window_length must be >= 2 * max_period");
  }
  if (window_width < 1) throw ParameterError("FrequencyParams: window_width must be >= 1");
  if (grid_step < 1) throw ParameterError("FrequencyParams: grid_step must be >= 1");
}

FrequencyMap estimate_frequency(const GrayImage& image, const SegmentationMask& mask,
                                const OrientationField& orientation, const FrequencyParams& params,
                                FrequencyDiagnostics* diagnostics) {
  params.validate();
  require_same_size("estimate_frequency", image, mask, orientation);
  require_foreground("estimate_frequency", mask);

  const int step = params.grid_step;
  const int gw = (image.width() + step - 1) / step;
  const int gh = (image.height() + step - 1) / step;
  RealMap periods(gw, gh, 0.0);
  ValidityMap valid(gw, gh, 0);

  const int len = params.window_length;
  const int wid = params.window_width;
  std::vector<double> sig(len);
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      const int cx = std::min(gx * step + step / 2, image.width() - 1);
      const int cy = std::min(gy * step + step / 2, image.height() - 1);
      if (!mask(cx, cy)) continue;
      const double theta = orientation(cx, cy);
      // Ridge direction and its normal, image coordinates (y down).
      const double rx = std::cos(theta), ry = -std::sin(theta);
      const double nx = std::sin(theta), ny = std::cos(theta);
      // Entries whose centre leaves the image or the mask end the signature;
      // clamped samples along a border would fake a different period.
      auto inside = [&](double x, double y) {
        const int ix = static_cast<int>(std::lround(x));
        const int iy = static_cast<int>(std::lround(y));
        return mask.contains(ix, iy) && mask(ix, iy) != 0;
      };
      int first = len, last = -1;
      for (int i = 0; i < len; ++i) {
        const double t = i - 0.5 * (len - 1);
        const double sx = cx + t * nx, sy = cy + t * ny;
        if (!inside(sx, sy)) {
          if (i < len / 2) {
            first = len;
            continue;
          }
          break;
        }
        if (first == len) first = i;
        last = i;
        double acc = 0.0;
        int n = 0;
        for (int j = 0; j < wid; ++j) {
          const double u = j - 0.5 * (wid - 1);
          const double x = sx + u * rx, y = sy + u * ry;
          if (x < 0.0 || y < 0.0 || x > image.width() - 1.0 || y > image.height() - 1.0) continue;
          acc += bilinear(image, x, y);
          ++n;
        }
        sig[i] = acc / n;
      }
      if (last < first || last - first + 1 < 2.0 * params.min_period) continue;
      std::vector<double> part(sig.begin() + first, sig.begin() + last + 1);
      const double period = signature_period(part);
      if (std::isfinite(period) && period >= params.min_period && period <= params.max_period) {
        periods(gx, gy) = period;
        valid(gx, gy) = 1;
      }
    }
  }
  return finish(std::move(periods), std::move(valid), mask, params, step, false, diagnostics);
}

FrequencyMap frequency_from_skeleton(const GrayImage& skeleton, const OrientationField& orientation,
                                     const SegmentationMask& mask, const FrequencyParams& params,
                                     FrequencyDiagnostics* diagnostics) {
  params.validate();
  require_same_size("frequency_from_skeleton", skeleton, mask, orientation);
  require_foreground("frequency_from_skeleton", mask);
  if (std::none_of(skeleton.pixels().begin(), skeleton.pixels().end(),
                   [](auto v) { return v != 0; })) {
    throw ParameterError("frequency_from_skeleton: skeleton has no ridge pixels");
  }

  const int w = skeleton.width();
  const int h = skeleton.height();
  const double half = 0.5 * params.window_length;
  RealMap periods(w, h, 0.0);
  ValidityMap valid(w, h, 0);
  std::vector<double> crossings;

  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      if (!mask(px, py)) continue;
      const double theta = orientation(px, py);
      const double nx = std::sin(theta), ny = std::cos(theta);

      // Grid traversal of the segment p(t) = c + t n, t in [-half, half],
      // visiting every pixel cell the segment passes through (4-connected),
      // so an 8-connected skeleton curve cannot be skipped.
      const double sx = px - half * nx, sy = py - half * ny;
      int ix = static_cast<int>(std::floor(sx + 0.5));
      int iy = static_cast<int>(std::floor(sy + 0.5));
      const int step_x = nx > 0 ? 1 : -1;
      const int step_y = ny > 0 ? 1 : -1;
      const double inf = std::numeric_limits<double>::infinity();
      const double dt_x = std::fabs(nx) > 1e-12 ? 1.0 / std::fabs(nx) : inf;
      const double dt_y = std::fabs(ny) > 1e-12 ? 1.0 / std::fabs(ny) : inf;
      double next_x = dt_x == inf ? inf
                                  : ((step_x > 0 ? (ix + 0.5 - sx) : (sx - (ix - 0.5))) * dt_x);
      double next_y = dt_y == inf ? inf
                                  : ((step_y > 0 ? (iy + 0.5 - sy) : (sy - (iy - 0.5))) * dt_y);
      const double total = 2.0 * half;

      crossings.clear();
      double run_sum = 0.0;
      int run_len = 0;
      auto close_run = [&] {
        if (run_len > 0) crossings.push_back(run_sum / run_len);
        run_sum = 0.0;
        run_len = 0;
      };
      double t = 0.0;
      while (t <= total) {
        if (skeleton.contains(ix, iy) && skeleton(ix, iy)) {
          run_sum += (ix - px) * nx + (iy - py) * ny;
          ++run_len;
        } else {
          close_run();
        }
        if (next_x < next_y) {
          t = next_x;
          next_x += dt_x;
          ix += step_x;
        } else {
          t = next_y;
          next_y += dt_y;
          iy += step_y;
        }
      }
      close_run();
      if (crossings.size() >= 2) {
        const double spacing =
            (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
        if (spacing > 0.0) {
          periods(px, py) = std::clamp(spacing, params.min_period, params.max_period);
          valid(px, py) = 1;
        }
      }
    }
  }
  return finish(std::move(periods), std::move(valid), mask, params, 1, true, diagnostics);
}

}  // namespace fpe
