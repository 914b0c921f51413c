#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpe/fields.hpp"
#include "support/synthetic.hpp"

using namespace fpe;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Largest orientation error over pixels at least `border` from the frame.
double worst_orientation_error(const OrientationField& o, double theta, int border) {
  double worst = 0.0;
  for (int y = border; y < o.height() - border; ++y) {
    for (int x = border; x < o.width() - border; ++x) {
      worst = std::max(worst, orientation_distance(o(x, y), theta));
    }
  }
  return worst;
}

double worst_relative_frequency_error(const FrequencyMap& f, double freq, int border) {
  double worst = 0.0;
  for (int y = border; y < f.height() - border; ++y) {
    for (int x = border; x < f.width() - border; ++x) {
      worst = std::max(worst, std::fabs(f(x, y) - freq) / freq);
    }
  }
  return worst;
}

// Ridge skeleton of straight lines `period` apart along the normal of theta.
GrayImage line_skeleton(int s, double theta, double period) {
  GrayImage img(s, s, 0);
  // Pixels within half a pixel-spacing of phase 0, about one per crossing.
  const double nx = std::sin(theta), ny = std::cos(theta);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const double phase = 2 * kPi * (x * nx + y * ny) / period;
      const double wrapped = std::remainder(phase, 2 * kPi);
      if (std::fabs(wrapped) < kPi / period) img(x, y) = 255;
    }
  }
  return img;
}

}  // namespace

TEST(Orientation, ParamsValidate) {
  EXPECT_THROW((OrientationParams{4, 0.1}.validate()), ParameterError);
  EXPECT_THROW((OrientationParams{1, 0.1}.validate()), ParameterError);
  EXPECT_THROW((OrientationParams{33, 1.0}.validate()), ParameterError);
  EXPECT_NO_THROW(OrientationParams{}.validate());
}

TEST(Orientation, RecoversSyntheticAngles) {
  const int s = 96;
  const auto mask = test::full_mask(s, s);
  for (int i = 0; i < 12; ++i) {
    const double theta = i * kPi / 12.0;
    for (double period : {5.0, 9.0, 13.0}) {
      const auto img = test::sinusoid(s, s, theta, period, 100.0, 0.3);
      const auto o = estimate_orientation(img, mask);
      EXPECT_LT(worst_orientation_error(o, theta, 16), 2.0 * kDeg)
          << "theta " << theta << " period " << period;
    }
  }
}

TEST(Orientation, Convention) {
  // Stripes that vary along x are vertical ridges: pi/2.
  GrayImage img(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) img(x, y) = (x / 4) % 2 ? 30 : 220;
  }
  const auto o = estimate_orientation(img, test::full_mask(64, 64));
  EXPECT_NEAR(o(32, 32), kPi / 2, 1e-6);
  // Ridges rising to the right as displayed are at pi/4.
  const auto diag = test::sinusoid(64, 64, kPi / 4, 8.0);
  EXPECT_NEAR(estimate_orientation(diag, test::full_mask(64, 64))(32, 32), kPi / 4, 1.0 * kDeg);
  // Ridge direction (cos t, -sin t): at t = pi/4 a ridge through (32, 32)
  // passes (40, 24), so the intensities match.
  EXPECT_EQ(diag(32, 32), diag(40, 24));
}

TEST(Orientation, ValuesInHalfOpenRange) {
  std::mt19937_64 rng(11);
  const auto img = test::add_noise(test::sinusoid(64, 64, 3.1, 7.0), 30.0, 2);
  const auto o = estimate_orientation(img, test::full_mask(64, 64));
  for (float v : o.pixels()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LT(static_cast<double>(v), kPi);
  }
}

TEST(Orientation, ConstantImageThrows) {
  EXPECT_THROW(estimate_orientation(GrayImage(32, 32, 128), test::full_mask(32, 32)), Error);
}

TEST(Orientation, MaskAndSizeChecks) {
  EXPECT_THROW(estimate_orientation(GrayImage(8, 8), SegmentationMask(8, 8, 0)), ParameterError);
  EXPECT_THROW(estimate_orientation(GrayImage(8, 8), SegmentationMask(8, 9, 1)), ParameterError);
}

TEST(Orientation, FlatRegionsTakeNearestCoherentAngle) {
  // Left half striped at pi/2, right half flat.
  GrayImage img(80, 40, 128);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 30; ++x) img(x, y) = (x / 4) % 2 ? 30 : 220;
  }
  const auto o = estimate_orientation(img, test::full_mask(80, 40));
  EXPECT_NEAR(o(75, 20), kPi / 2, 1e-6);
}

TEST(Coherence, FlatIsZeroStripesNearOne) {
  const auto flat = orientation_coherence(GrayImage(32, 32, 90));
  for (double v : flat.pixels()) EXPECT_EQ(v, 0.0);
  const auto c = orientation_coherence(test::sinusoid(96, 96, 0.5, 9.0));
  EXPECT_GT(c(48, 48), 0.95);
  EXPECT_LE(c(48, 48), 1.0 + 1e-12);
}

TEST(DoubleAngle, RoundTrip) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(0.0f, static_cast<float>(kPi));
  OrientationField o(17, 9);
  for (auto& v : o.pixels()) {
    v = u(rng);
    if (static_cast<double>(v) >= kPi) v = 0.0f;
  }
  const auto enc = double_angle_encode(o);
  const auto back = double_angle_decode(enc.x, enc.y);
  for (std::size_t i = 0; i < o.size(); ++i) {
    EXPECT_LT(orientation_distance(back.pixels()[i], o.pixels()[i]), 1e-6);
    EXPECT_NEAR(enc.x.pixels()[i], std::cos(2.0 * o.pixels()[i]), 1e-12);
  }
}

TEST(DoubleAngle, SeamValuesCoincide) {
  // theta and theta + pi share one encoding, so 0 and values just below pi
  // decode close to each other.
  OrientationField o(2, 1, std::vector<float>{0.0f, 3.14159f});
  const auto enc = double_angle_encode(o);
  EXPECT_NEAR(enc.x(0, 0), enc.x(1, 0), 1e-9);
  const auto back = double_angle_decode(enc.x, enc.y);
  EXPECT_LT(orientation_distance(back(0, 0), back(1, 0)), 1e-5);
}

TEST(DoubleAngle, ZeroVectorIsUndefined) {
  RealMap x(2, 1, 0.0), y(2, 1, 0.0);
  x(0, 0) = 1.0;
  EXPECT_THROW(double_angle_decode(x, y), ParameterError);
  SegmentationMask mask(2, 1, std::vector<std::uint8_t>{1, 0});
  const auto o = double_angle_decode(x, y, mask);
  EXPECT_EQ(o(0, 0), 0.0f);
  EXPECT_EQ(o(1, 0), 0.0f);
  mask(1, 0) = 1;
  EXPECT_THROW(double_angle_decode(x, y, mask), ParameterError);
}

TEST(OrientationMath, DistanceAndNormalize) {
  EXPECT_NEAR(orientation_distance(0.05, kPi - 0.05), 0.1, 1e-12);
  EXPECT_NEAR(orientation_distance(0.0, kPi / 2), kPi / 2, 1e-12);
  EXPECT_NEAR(normalize_orientation(-0.25), kPi - 0.25, 1e-12);
  EXPECT_NEAR(normalize_orientation(3 * kPi + 0.5), 0.5, 1e-9);
}

TEST(Frequency, ParamsValidate) {
  FrequencyParams p;
  p.min_period = 13;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.window_length = 20;
  EXPECT_THROW(p.validate(), ParameterError);
  p = {};
  p.grid_step = 0;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Frequency, RecoversSyntheticPeriods) {
  const int s = 128;
  const auto mask = test::full_mask(s, s);
  for (int period = 5; period <= 13; ++period) {
    for (double theta : {0.0, 0.4, kPi / 2, 2.5}) {
      const auto img = test::sinusoid(s, s, theta, period, 100.0, 0.3);
      const auto o = OrientationField(s, s, static_cast<float>(theta));
      FrequencyDiagnostics diag;
      const auto f = estimate_frequency(img, mask, o, {}, &diag);
      EXPECT_LT(worst_relative_frequency_error(f, 1.0 / period, 16), 0.03)
          << "period " << period << " theta " << theta;
      EXPECT_GT(diag.measured, 0u);
      EXPECT_FALSE(diag.used_fallback);
    }
  }
}

TEST(Frequency, BoundsAndBackground) {
  const int s = 96;
  auto mask = test::inset_mask(s, s, 10);
  const auto img = test::add_noise(test::sinusoid(s, s, 1.0, 8.0), 60.0, 5);
  const auto f = estimate_frequency(img, mask, OrientationField(s, s, 1.0f));
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      if (!mask(x, y)) {
        EXPECT_EQ(f(x, y), 0.0f);
      } else {
        EXPECT_GE(f(x, y), static_cast<float>(1.0 / 13.0));
        EXPECT_LE(f(x, y), static_cast<float>(1.0 / 5.0));
      }
    }
  }
}

TEST(Frequency, FlatImageUsesFallback) {
  FrequencyDiagnostics diag;
  const auto f = estimate_frequency(GrayImage(64, 64, 100), test::full_mask(64, 64),
                                    OrientationField(64, 64, 0.0f), {}, &diag);
  EXPECT_TRUE(diag.used_fallback);
  EXPECT_NEAR(f(32, 32), 1.0 / 9.0, 1e-6);
}

TEST(Frequency, FillsUnmeasurableWindows) {
  // Right part flat: its windows take the neighbouring measured period.
  const int s = 128;
  auto img = test::sinusoid(s, s, 0.0, 7.0, 100.0, 0.3);
  for (int y = 0; y < s; ++y) {
    for (int x = 90; x < s; ++x) img(x, y) = 128;
  }
  FrequencyDiagnostics diag;
  const auto f = estimate_frequency(img, test::full_mask(s, s), OrientationField(s, s, 0.0f), {},
                                    &diag);
  EXPECT_GT(diag.interpolated, 0u);
  EXPECT_NEAR(f(120, 64), 1.0 / 7.0, 0.03 / 7.0);
}

TEST(SkeletonFrequency, AxisAlignedLines) {
  const int s = 96;
  for (int period : {5, 8, 12}) {
    GrayImage skel(s, s, 0);
    for (int y = 0; y < s; y += period) {
      for (int x = 0; x < s; ++x) skel(x, y) = 255;
    }
    const auto f = frequency_from_skeleton(skel, OrientationField(s, s, 0.0f),
                                           test::full_mask(s, s));
    EXPECT_LT(worst_relative_frequency_error(f, 1.0 / period, 32), 1e-6) << period;
  }
}

TEST(SkeletonFrequency, ObliqueLines) {
  const int s = 128;
  for (double theta : {0.5, kPi / 4, 2.0}) {
    const double period = 9.0;
    const auto skel = line_skeleton(s, theta, period);
    const auto f = frequency_from_skeleton(skel, OrientationField(s, s, static_cast<float>(theta)),
                                           test::full_mask(s, s));
    EXPECT_LT(worst_relative_frequency_error(f, 1.0 / period, 40), 0.05) << theta;
  }
}

TEST(SkeletonFrequency, ClampedAndChecked) {
  const int s = 64;
  GrayImage skel(s, s, 0);
  for (int y = 0; y < s; y += 3) {
    for (int x = 0; x < s; ++x) skel(x, y) = 255;
  }
  const auto f = frequency_from_skeleton(skel, OrientationField(s, s, 0.0f), test::full_mask(s, s));
  EXPECT_NEAR(f(32, 32), 1.0 / 5.0, 1e-6);
  EXPECT_THROW(frequency_from_skeleton(GrayImage(s, s, 0), OrientationField(s, s, 0.0f),
                                       test::full_mask(s, s)),
               ParameterError);
}
