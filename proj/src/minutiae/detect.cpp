#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fpe/minutiae.hpp"

namespace fpe {
namespace {

constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
// 4-neighbours first so traces follow the straightest continuation.
constexpr int kTraceOrder[8] = {0, 2, 4, 6, 1, 3, 5, 7};

struct Point {
  int x, y;
  bool operator==(const Point&) const = default;
};

enum class TraceEnd { Steps, Junction, Dead };

struct Trace {
  std::vector<Point> path;  ///< pixels walked, excluding the start
  TraceEnd end = TraceEnd::Dead;
};

bool contains(const std::vector<Point>& v, Point p) {
  return std::find(v.begin(), v.end(), p) != v.end();
}

// Walks from `start` through `first` for at most `steps` pixels. Stops on a
// junction (CN >= 3) or when no unvisited ridge neighbour remains.
Trace trace_ridge(const SkeletonImage& skel, Point start, Point first, int steps,
                  std::vector<Point> visited) {
  Trace t;
  visited.push_back(start);
  Point cur = first;
  while (true) {
    visited.push_back(cur);
    t.path.push_back(cur);
    if (crossing_number(skel, cur.x, cur.y) >= 3) {
      t.end = TraceEnd::Junction;
      return t;
    }
    if (static_cast<int>(t.path.size()) >= steps) {
      t.end = TraceEnd::Steps;
      return t;
    }
    Point next{-1, -1};
    for (int k : kTraceOrder) {
      const Point n{cur.x + kDx[k], cur.y + kDy[k]};
      if (!skel.contains(n.x, n.y) || !skel(n.x, n.y) || contains(visited, n)) continue;
      if (next.x < 0) {
        next = n;
      } else {
        // Same-branch neighbours adjacent to the chosen step are skipped.
        visited.push_back(n);
      }
    }
    if (next.x < 0) {
      t.end = TraceEnd::Dead;
      return t;
    }
    cur = next;
  }
}

std::vector<Point> ridge_neighbours_of(const SkeletonImage& skel, Point p) {
  std::vector<Point> out;
  for (int k : kTraceOrder) {
    const Point n{p.x + kDx[k], p.y + kDy[k]};
    if (skel.contains(n.x, n.y) && skel(n.x, n.y)) out.push_back(n);
  }
  return out;
}

// Removes branches that leave an end point and reach a junction, and isolated
// fragments, when shorter than min_spur pixels.
SkeletonImage prune_spurs(const SkeletonImage& skel, int min_spur) {
  if (min_spur <= 0) return skel;
  SkeletonImage out = skel;
  for (int y = 0; y < skel.height(); ++y) {
    for (int x = 0; x < skel.width(); ++x) {
      if (!skel(x, y) || crossing_number(skel, x, y) != 1) continue;
      const Point start{x, y};
      const auto nbrs = ridge_neighbours_of(skel, start);
      std::vector<Point> skip(nbrs.begin() + 1, nbrs.end());
      const Trace t = trace_ridge(skel, start, nbrs.front(), min_spur, skip);
      // Spur length counts the end point; a junction ending the trace stays.
      std::vector<Point> spur{start};
      if (t.end == TraceEnd::Junction) {
        spur.insert(spur.end(), t.path.begin(), t.path.end() - 1);
      } else if (t.end == TraceEnd::Dead) {
        spur.insert(spur.end(), t.path.begin(), t.path.end());
      } else {
        continue;
      }
      if (static_cast<int>(spur.size()) < min_spur) {
        for (const auto& p : spur) out(p.x, p.y) = 0;
      }
    }
  }
  return out;
}

double angle_of(Point from, Point to) {
  // y axis up, counter-clockwise.
  return normalize_direction(std::atan2(-(to.y - from.y), to.x - from.x));
}

double ending_direction(const SkeletonImage& skel, Point p, int steps) {
  const auto nbrs = ridge_neighbours_of(skel, p);
  if (nbrs.empty()) return 0.0;
  std::vector<Point> skip(nbrs.begin() + 1, nbrs.end());
  const Trace t = trace_ridge(skel, p, nbrs.front(), steps, skip);
  return angle_of(p, t.path.back());
}

double bifurcation_direction(const SkeletonImage& skel, Point p, int steps) {
  // Ridge neighbours grouped into arcs around the 8-cycle; one branch each.
  const auto n = neighbourhood(skel, p.x, p.y);
  int start = 0;
  while (start < 8 && n[start]) ++start;  // begin the sweep on a background slot
  std::vector<std::vector<Point>> branches;
  for (int i = 0; i < 8; ++i) {
    const int k = (start + i) % 8;
    if (!n[k]) continue;
    const Point q{p.x + kDx[k], p.y + kDy[k]};
    if (i > 0 && n[(start + i - 1) % 8]) {
      branches.back().push_back(q);
    } else {
      branches.push_back({q});
    }
  }
  std::vector<double> angles;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    // Prefer a 4-neighbour as the branch entry.
    auto entry = branches[b].front();
    for (const auto& q : branches[b]) {
      if (q.x == p.x || q.y == p.y) {
        entry = q;
        break;
      }
    }
    std::vector<Point> skip;
    for (std::size_t o = 0; o < branches.size(); ++o) {
      for (const auto& q : branches[o]) {
        if (!(q == entry)) skip.push_back(q);
      }
    }
    const Trace t = trace_ridge(skel, p, entry, steps, skip);
    angles.push_back(angle_of(p, t.path.back()));
  }
  if (angles.size() < 2) return angles.empty() ? 0.0 : angles.front();

  std::size_t ba = 0, bb = 1;
  double best = direction_distance(angles[0], angles[1]);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    for (std::size_t j = i + 1; j < angles.size(); ++j) {
      const double d = direction_distance(angles[i], angles[j]);
      if (d < best) {
        best = d;
        ba = i;
        bb = j;
      }
    }
  }
  const double mx = std::cos(angles[ba]) + std::cos(angles[bb]);
  const double my = std::sin(angles[ba]) + std::sin(angles[bb]);
  const double mean = (mx == 0.0 && my == 0.0) ? angles[ba] : std::atan2(my, mx);
  return normalize_direction(mean + std::numbers::pi);
}

}  // namespace

MinutiaSet detect_minutiae(const SkeletonImage& skeleton, const SegmentationMask& mask,
                           const DetectParams& params) {
  require_same_size("detect_minutiae", skeleton, mask);
  if (!is_thin(skeleton)) throw ParameterError("skeleton not thin");
  if (params.trace_steps < 1) throw ParameterError("detect_minutiae: trace_steps must be >= 1");

  BinaryImage pruned_binary(skeleton.width(), skeleton.height(), 0);
  {
    const auto pruned = prune_spurs(skeleton, params.min_spur);
    for (std::size_t i = 0; i < pruned.size(); ++i) pruned_binary.pixels()[i] = pruned.pixels()[i];
  }
  // Removing a spur can leave a redundant pixel at its junction.
  const SkeletonImage skel = thin(pruned_binary);

  MinutiaSet out;
  std::vector<Point> bifurcations;
  for (int y = 0; y < skel.height(); ++y) {
    for (int x = 0; x < skel.width(); ++x) {
      if (!skel(x, y) || !mask(x, y)) continue;
      const int cn = crossing_number(skel, x, y);
      const Point p{x, y};
      if (cn == 1) {
        out.push_back({static_cast<double>(x), static_cast<double>(y),
                       ending_direction(skel, p, params.trace_steps), MinutiaKind::Ending});
      } else if (cn == 3) {
        // One bifurcation per junction cluster.
        const bool adjacent_to_previous = std::any_of(
            bifurcations.begin(), bifurcations.end(),
            [&](Point q) { return std::abs(q.x - x) <= 1 && std::abs(q.y - y) <= 1; });
        bifurcations.push_back(p);
        if (adjacent_to_previous) continue;
        out.push_back({static_cast<double>(x), static_cast<double>(y),
                       bifurcation_direction(skel, p, params.trace_steps),
                       MinutiaKind::Bifurcation});
      }
    }
  }
  return out;
}

MinutiaSet extract_minutiae(const EnhancedImage& enhanced, const SegmentationMask& mask,
                            const DetectParams& params, double threshold) {
  return detect_minutiae(thin(binarize(enhanced, threshold)), mask, params);
}

}  // namespace fpe
