#include <cstdlib>
#include <array>
#include <vector>

#include "fpe/minutiae.hpp"

namespace fpe {
namespace {

// Offsets for N, NE, E, SE, S, SW, W, NW.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

int count_components(const std::array<std::uint8_t, 8>& n, std::uint8_t value, bool eight) {
  std::array<bool, 8> seen{};
  int components = 0;
  for (int i = 0; i < 8; ++i) {
    if (n[i] != value || seen[i]) continue;
    ++components;
    int stack[8];
    int top = 0;
    stack[top++] = i;
    seen[i] = true;
    while (top > 0) {
      const int a = stack[--top];
      for (int j = 0; j < 8; ++j) {
        if (seen[j] || n[j] != value) continue;
        const int ddx = std::abs(kDx[a] - kDx[j]);
        const int ddy = std::abs(kDy[a] - kDy[j]);
        const bool adjacent = eight ? (ddx <= 1 && ddy <= 1) : (ddx + ddy == 1);
        if (adjacent) {
          seen[j] = true;
          stack[top++] = j;
        }
      }
    }
  }
  return components;
}

// Background components must also touch the centre through a 4-neighbour.
int count_background_components(const std::array<std::uint8_t, 8>& n) {
  std::array<bool, 8> seen{};
  int components = 0;
  for (int i = 0; i < 8; i += 2) {  // start only from N, E, S, W
    if (n[i] != 0 || seen[i]) continue;
    ++components;
    int stack[8];
    int top = 0;
    stack[top++] = i;
    seen[i] = true;
    while (top > 0) {
      const int a = stack[--top];
      for (int j = 0; j < 8; ++j) {
        if (seen[j] || n[j] != 0) continue;
        if (std::abs(kDx[a] - kDx[j]) + std::abs(kDy[a] - kDy[j]) == 1) {
          seen[j] = true;
          stack[top++] = j;
        }
      }
    }
  }
  return components;
}

std::array<bool, 256> build_simple_table() {
  std::array<bool, 256> table{};
  for (int code = 0; code < 256; ++code) {
    std::array<std::uint8_t, 8> n{};
    for (int i = 0; i < 8; ++i) n[i] = (code >> i) & 1;
    table[code] = count_components(n, 1, true) == 1 && count_background_components(n) == 1;
  }
  return table;
}

const std::array<bool, 256>& simple_table() {
  static const auto table = build_simple_table();
  return table;
}

template <typename R>
std::array<std::uint8_t, 8> ring(const R& img, int x, int y) {
  std::array<std::uint8_t, 8> n{};
  for (int i = 0; i < 8; ++i) {
    const int nx = x + kDx[i], ny = y + kDy[i];
    n[i] = img.contains(nx, ny) && img(nx, ny) ? 1 : 0;
  }
  return n;
}

int code_of(const std::array<std::uint8_t, 8>& n) {
  int code = 0;
  for (int i = 0; i < 8; ++i) code |= n[i] << i;
  return code;
}

int ridge_neighbours(const std::array<std::uint8_t, 8>& n) {
  int b = 0;
  for (auto v : n) b += v;
  return b;
}

// Deletable without changing topology and not an end point.
bool removable(const std::array<std::uint8_t, 8>& n) {
  return ridge_neighbours(n) >= 2 && simple_table()[code_of(n)];
}

int transitions01(const std::array<std::uint8_t, 8>& n) {
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (n[i] == 0 && n[(i + 1) % 8] == 1);
  return a;
}

// One Zhang-Suen sub-iteration; returns the number of deleted pixels.
int zhang_suen_pass(SkeletonImage& img, bool first) {
  std::vector<int> candidates;
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img(x, y)) continue;
      const auto n = ring(img, x, y);
      const int b = ridge_neighbours(n);
      if (b < 2 || b > 6 || transitions01(n) != 1) continue;
      // n[0]=P2 (N), n[2]=P4 (E), n[4]=P6 (S), n[6]=P8 (W)
      const bool c1 = first ? (n[0] && n[2] && n[4]) : (n[0] && n[2] && n[6]);
      const bool c2 = first ? (n[2] && n[4] && n[6]) : (n[0] && n[4] && n[6]);
      if (!c1 && !c2) candidates.push_back(y * w + x);
    }
  }
  // Parallel deletion can erase 2-pixel-thick structures entirely; deleting
  // sequentially with a fresh simple-point check cannot.
  int deleted = 0;
  for (int i : candidates) {
    const int x = i % w, y = i / w;
    if (removable(ring(img, x, y))) {
      img(x, y) = 0;
      ++deleted;
    }
  }
  return deleted;
}

int redundancy_pass(SkeletonImage& img) {
  int deleted = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img(x, y) && removable(ring(img, x, y))) {
        img(x, y) = 0;
        ++deleted;
      }
    }
  }
  return deleted;
}

}  // namespace

BinaryImage binarize(const EnhancedImage& enhanced, double threshold) {
  BinaryImage out(enhanced.width(), enhanced.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = static_cast<double>(enhanced.pixels()[i]) >= threshold ? 1 : 0;
  }
  return out;
}

SkeletonImage thin(const BinaryImage& binary) {
  SkeletonImage img(binary.width(), binary.height(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels()[i] = binary.pixels()[i] ? 1 : 0;
  while (true) {
    const int a = zhang_suen_pass(img, true);
    const int b = zhang_suen_pass(img, false);
    if (a == 0 && b == 0) break;
  }
  while (redundancy_pass(img) > 0) {
  }
  return img;
}

SkeletonImage skeleton_from_gray(const GrayImage& image) {
  SkeletonImage out(image.width(), image.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = image.pixels()[i] ? 1 : 0;
  return out;
}

GrayImage skeleton_to_gray(const SkeletonImage& skeleton) {
  GrayImage out(skeleton.width(), skeleton.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = skeleton.pixels()[i] ? 255 : 0;
  return out;
}

std::array<std::uint8_t, 8> neighbourhood(const SkeletonImage& skeleton, int x, int y) {
  return ring(skeleton, x, y);
}

int crossing_number(const SkeletonImage& skeleton, int x, int y) {
  const auto n = ring(skeleton, x, y);
  int sum = 0;
  for (int i = 0; i < 8; ++i) sum += std::abs(n[i] - n[(i + 1) % 8]);
  return sum / 2;
}

bool is_simple(const std::array<std::uint8_t, 8>& neighbours) {
  return simple_table()[code_of(neighbours)];
}

bool is_thin(const SkeletonImage& skeleton) {
  for (int y = 0; y < skeleton.height(); ++y) {
    for (int x = 0; x < skeleton.width(); ++x) {
      if (skeleton(x, y) && removable(ring(skeleton, x, y))) return false;
    }
  }
  return true;
}

}  // namespace fpe
