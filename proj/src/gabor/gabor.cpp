#include "fpe/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fpe/error.hpp"

namespace fpe {
namespace {

constexpr double kPi = std::numbers::pi;

double circular_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, kPi - d);
}

}  // namespace

double gabor_sigma(double freq) { return 5.0 / (12.0 * freq); }

int gabor_size(double freq) {
  // 3 sigma = 5 / (4 f) is an exact integer for some periods; the guard
  // keeps floating error in the division from adding two extra taps.
  return 1 + 2 * static_cast<int>(std::ceil(3.0 * gabor_sigma(freq) - 1e-9));
}

GaborKernel gabor_kernel(double theta, double freq) {
  if (!(theta >= 0.0 && theta < kPi)) {
    throw ParameterError("gabor_kernel: theta must be in [0, pi), got " + std::to_string(theta));
  }
  if (!(freq > 0.0 && freq < 0.5)) {
    throw ParameterError("gabor_kernel: freq must be in (0, 0.5), got " + std::to_string(freq));
  }
  GaborKernel k;
  k.theta = theta;
  k.freq = freq;
  k.sigma = gabor_sigma(freq);
  k.size = gabor_size(freq);
  const int r = k.size / 2;
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double two_sigma2 = 2.0 * k.sigma * k.sigma;

  k.weights.resize(static_cast<std::size_t>(k.size) * k.size);
  double sum = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double xt = x * s + y * c;
      const double yt = -x * c + y * s;
      const double v = std::exp(-(xt * xt + yt * yt) / two_sigma2) * std::cos(2.0 * kPi * freq * xt);
      k.weights[static_cast<std::size_t>(y + r) * k.size + (x + r)] = v;
      sum += v;
    }
  }
  k.mean = sum / static_cast<double>(k.weights.size());
  double sq = 0.0;
  for (auto& v : k.weights) {
    v -= k.mean;
    sq += v * v;
  }
  k.norm = std::sqrt(sq);
  for (auto& v : k.weights) v /= k.norm;

  // exp(-(x^2+y^2)/2s^2) cos(ax + by) = G(x)cos(ax) G(y)cos(by) - G(x)sin(ax) G(y)sin(by)
  const double ax = 2.0 * kPi * freq * s;
  const double by = 2.0 * kPi * freq * c;
  k.cos_x.resize(k.size);
  k.sin_x.resize(k.size);
  k.cos_y.resize(k.size);
  k.sin_y.resize(k.size);
  for (int t = -r; t <= r; ++t) {
    const double g = std::exp(-(t * t) / two_sigma2);
    k.cos_x[t + r] = g * std::cos(ax * t);
    k.sin_x[t + r] = g * std::sin(ax * t);
    k.cos_y[t + r] = g * std::cos(by * t);
    k.sin_y[t + r] = g * std::sin(by * t);
  }
  return k;
}

std::vector<double> GaborBank::default_periods() { return {5, 6, 7, 8, 9, 10, 11, 12, 13}; }

GaborBank GaborBank::build(int orientation_count, const std::vector<double>& periods) {
  if (orientation_count < 1) throw ParameterError("GaborBank: orientation_count must be >= 1");
  if (periods.empty()) throw ParameterError("GaborBank: periods must not be empty");
  for (double p : periods) {
    if (!(p > 2.0) || !std::isfinite(p)) {
      throw ParameterError("GaborBank: periods must be finite and > 2 px");
    }
  }
  GaborBank bank;
  for (double p : periods) bank.frequencies_.push_back(1.0 / p);
  std::sort(bank.frequencies_.begin(), bank.frequencies_.end());
  if (std::adjacent_find(bank.frequencies_.begin(), bank.frequencies_.end()) !=
      bank.frequencies_.end()) {
    throw ParameterError("GaborBank: duplicate periods");
  }
  for (int i = 0; i < orientation_count; ++i) {
    bank.orientations_.push_back(i * kPi / orientation_count);
  }
  bank.kernels_.reserve(bank.orientations_.size() * bank.frequencies_.size());
  for (double theta : bank.orientations_) {
    for (double f : bank.frequencies_) bank.kernels_.push_back(gabor_kernel(theta, f));
  }
  return bank;
}

std::size_t GaborBank::select(double theta, double freq) const {
  if (!(theta >= 0.0 && theta < kPi)) {
    theta = std::fmod(theta, kPi);
    if (theta < 0.0) theta += kPi;
    if (!(theta < kPi)) theta = 0.0;
  }
  const std::size_t n = orientations_.size();
  const double step = kPi / static_cast<double>(n);
  const long base = static_cast<long>(std::floor(theta / step));
  std::size_t best_o = 0;
  double best_d = 0.0;
  bool first = true;
  // The true argmin is base or base+1; the extra candidates absorb rounding
  // in the floor.
  for (long k = base - 1; k <= base + 2; ++k) {
    const std::size_t o = static_cast<std::size_t>(((k % static_cast<long>(n)) + static_cast<long>(n)) %
                                                   static_cast<long>(n));
    const double d = circular_distance(theta, orientations_[o]);
    if (first || d < best_d || (d == best_d && o < best_o)) {
      best_o = o;
      best_d = d;
      first = false;
    }
  }

  const auto it = std::lower_bound(frequencies_.begin(), frequencies_.end(), freq);
  std::size_t best_f = 0;
  if (it == frequencies_.end()) {
    best_f = frequencies_.size() - 1;
  } else {
    best_f = static_cast<std::size_t>(it - frequencies_.begin());
    if (best_f > 0 &&
        std::fabs(freq - frequencies_[best_f - 1]) <= std::fabs(freq - frequencies_[best_f])) {
      --best_f;
    }
  }
  return index(best_o, best_f);
}

}  // namespace fpe
