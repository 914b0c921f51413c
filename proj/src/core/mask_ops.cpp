#include "fpe/mask_ops.hpp"

#include <limits>
#include <vector>

namespace fpe {
namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Lower envelope of parabolas; f holds squared distances along one line.
void squared_edt_1d(std::span<const std::int64_t> f, std::span<std::int64_t> d,
                    std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  // Skip leading infinite entries; a line with no finite entry stays infinite.
  int first = 0;
  while (first < n && f[first] >= kInf) ++first;
  if (first == n) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  v[0] = first;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = first + 1; q < n; ++q) {
    if (f[q] >= kInf) continue;
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = (static_cast<double>(f[q] + static_cast<std::int64_t>(q) * q) -
           static_cast<double>(f[p] + static_cast<std::int64_t>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const std::int64_t dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

SquaredDistanceMap squared_distance_to_background(const SegmentationMask& mask) {
  // Work on a frame padded by one background pixel on every side.
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  std::vector<std::int64_t> grid(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      grid[static_cast<std::size_t>(y + 1) * w + x + 1] = mask(x, y) ? kInf : 0;
    }
  }

  std::vector<int> v;
  std::vector<double> z;
  std::vector<std::int64_t> line(std::max(w, h));
  std::vector<std::int64_t> out(std::max(w, h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) line[y] = grid[static_cast<std::size_t>(y) * w + x];
    squared_edt_1d(std::span(line).first(h), std::span(out).first(h), v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = out[y];
  }
  for (int y = 0; y < h; ++y) {
    auto row = std::span(grid).subspan(static_cast<std::size_t>(y) * w, w);
    std::copy(row.begin(), row.end(), line.begin());
    squared_edt_1d(std::span(line).first(w), row, v, z);
  }

  SquaredDistanceMap result(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      result(x, y) = grid[static_cast<std::size_t>(y + 1) * w + x + 1];
    }
  }
  return result;
}

SegmentationMask erode_mask(const SegmentationMask& mask, double radius) {
  if (!(radius >= 0.0)) throw ParameterError("erode_mask: radius must be >= 0");
  if (radius == 0.0) return mask;
  const auto dist2 = squared_distance_to_background(mask);
  const double r2 = radius * radius;
  SegmentationMask out(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = static_cast<double>(dist2.pixels()[i]) > r2 ? 1 : 0;
  }
  return out;
}

}  // namespace fpe
