#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include "fpe/evalkit.hpp"
#include "fpe/mask_ops.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace fpe;
using namespace fpe::test;

namespace {

constexpr double kPi = std::numbers::pi;

Minutia E(double x, double y, double dir = 0.0) { return {x, y, dir, MinutiaKind::Ending}; }
Minutia B(double x, double y, double dir = 0.0) { return {x, y, dir, MinutiaKind::Bifurcation}; }

// Greedy reference: all admissible pairs sorted by (distance, pred, gt).
std::vector<std::tuple<double, std::size_t, std::size_t>> greedy_reference(
    const MinutiaSet& pred, const MinutiaSet& gt, double tau_d, double tau_theta, bool exact) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (admissible_by_definition(pred[i], gt[j], tau_d, tau_theta, exact)) {
        cand.emplace_back(std::hypot(pred[i].x - gt[j].x, pred[i].y - gt[j].y), i, j);
      }
    }
  }
  std::sort(cand.begin(), cand.end());
  std::vector<bool> pu(pred.size()), gu(gt.size());
  std::vector<std::tuple<double, std::size_t, std::size_t>> out;
  for (auto& c : cand) {
    if (pu[std::get<1>(c)] || gu[std::get<2>(c)]) continue;
    pu[std::get<1>(c)] = gu[std::get<2>(c)] = true;
    out.push_back(c);
  }
  return out;
}

MinutiaSet jittered_copy(const MinutiaSet& gt, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::uniform_real_distribution<double> a(-0.5, 0.5);
  std::bernoulli_distribution flip(0.2);
  MinutiaSet out;
  for (const auto& g : gt) {
    Minutia p = g;
    p.x += u(rng);
    p.y += u(rng);
    p.direction = normalize_direction(p.direction + a(rng));
    if (flip(rng)) {
      p.kind = p.kind == MinutiaKind::Ending ? MinutiaKind::Bifurcation : MinutiaKind::Ending;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(MatchCriteria, Validation) {
  EXPECT_NO_THROW(MatchCriteria{}.validate());
  EXPECT_DOUBLE_EQ(MatchCriteria{}.tau_d, 14.0);
  EXPECT_DOUBLE_EQ(MatchCriteria{}.tau_theta, kPi / 9);
  EXPECT_THROW((MatchCriteria{0.0, 0.3}.validate()), ParameterError);
  EXPECT_THROW((MatchCriteria{-1.0, 0.3}.validate()), ParameterError);
  EXPECT_THROW((MatchCriteria{14.0, 0.0}.validate()), ParameterError);
  EXPECT_THROW((MatchCriteria{14.0, kPi + 1e-9}.validate()), ParameterError);
  EXPECT_NO_THROW((MatchCriteria{14.0, kPi}.validate()));
  EXPECT_THROW(match_minutiae({}, {}, MatchCriteria{0.0, 0.3}), ParameterError);
}

TEST(Match, IdentityMatchesEverything) {
  std::mt19937_64 rng(1);
  const auto gt = random_minutiae(rng, 30, 200, 200);
  const auto m = match_minutiae(gt, gt, {});
  EXPECT_EQ(m.tp(), gt.size());
  EXPECT_EQ(m.fp(), 0u);
  EXPECT_EQ(m.fn(), 0u);
}

TEST(Match, DistanceAndTypeExamples) {
  const MinutiaSet pred{E(10, 10)};
  const auto m = match_minutiae(pred, {E(20, 10)}, {});
  ASSERT_EQ(m.tp(), 1u);
  EXPECT_DOUBLE_EQ(m.pairs[0].distance, 10.0);

  const MinutiaSet gt_b{B(20, 10)};
  const auto exact = match_minutiae(pred, gt_b, {14.0, kPi / 9, TypeMode::Exact});
  EXPECT_EQ(exact.tp(), 0u);
  EXPECT_EQ(exact.fp(), 1u);
  EXPECT_EQ(exact.fn(), 1u);
  EXPECT_EQ(match_minutiae(pred, gt_b, {14.0, kPi / 9, TypeMode::Agnostic}).tp(), 1u);
}

TEST(Match, BoundariesAreInclusive) {
  EXPECT_TRUE(admissible(E(0, 0), E(14, 0), {}));
  EXPECT_FALSE(admissible(E(0, 0), E(14.000001, 0), {}));
  EXPECT_TRUE(admissible(E(0, 0, 0.0), E(0, 0, kPi / 9), {}));
  EXPECT_FALSE(admissible(E(0, 0, 0.0), E(0, 0, kPi / 9 + 1e-9), {}));
  // Circular direction difference across 0.
  EXPECT_TRUE(admissible(E(0, 0, 0.1), E(0, 0, 2 * kPi - 0.1), {}));
}

TEST(Match, TiesGoToLowerIndices) {
  // One prediction equidistant from two ground truths.
  const auto m = match_minutiae({E(0, 0)}, {E(5, 0), E(-5, 0)}, {});
  ASSERT_EQ(m.tp(), 1u);
  EXPECT_EQ(m.pairs[0].gt, 0u);
  EXPECT_EQ(m.unmatched_gt, std::vector<std::size_t>{1});
  // Two predictions equidistant from one ground truth.
  const auto m2 = match_minutiae({E(0, 3), E(0, -3)}, {E(0, 0)}, {});
  ASSERT_EQ(m2.tp(), 1u);
  EXPECT_EQ(m2.pairs[0].pred, 0u);
}

TEST(Match, AgreesWithReferenceGreedyAndIsValid) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = random_minutiae(rng, 1 + trial % 12, 60, 60);
    const auto pred = random_minutiae(rng, 1 + (trial * 7) % 12, 60, 60);
    for (auto mode : {TypeMode::Exact, TypeMode::Agnostic}) {
      const MatchCriteria c{14.0, kPi / 4, mode};
      const auto m = match_minutiae(pred, gt, c);
      const auto ref = greedy_reference(pred, gt, 14.0, kPi / 4, mode == TypeMode::Exact);
      ASSERT_EQ(m.pairs.size(), ref.size());
      std::vector<int> pu(pred.size()), gu(gt.size());
      for (std::size_t k = 0; k < ref.size(); ++k) {
        EXPECT_EQ(m.pairs[k].pred, std::get<1>(ref[k]));
        EXPECT_EQ(m.pairs[k].gt, std::get<2>(ref[k]));
        ++pu[m.pairs[k].pred];
        ++gu[m.pairs[k].gt];
        EXPECT_TRUE(admissible_by_definition(pred[m.pairs[k].pred], gt[m.pairs[k].gt], 14.0,
                                             kPi / 4, mode == TypeMode::Exact));
      }
      for (auto i : m.unmatched_pred) ++pu[i];
      for (auto j : m.unmatched_gt) ++gu[j];
      for (int v : pu) EXPECT_EQ(v, 1);
      for (int v : gu) EXPECT_EQ(v, 1);
    }
  }
}

TEST(Match, GreedyIsMaximumOnSeparatedInstances) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto gt = separated_minutiae(rng, 1 + trial % 8, 300, 300, 2 * 14.0);
    auto pred = jittered_copy(gt, rng, 8.0);
    const auto extra = separated_minutiae(rng, trial % 3, 300, 300, 2 * 14.0);
    pred.insert(pred.end(), extra.begin(), extra.end());
    for (bool exact : {true, false}) {
      const MatchCriteria c{14.0, kPi / 9, exact ? TypeMode::Exact : TypeMode::Agnostic};
      EXPECT_EQ(match_minutiae(pred, gt, c).tp(),
                brute_force_max_matching(pred, gt, 14.0, kPi / 9, exact));
    }
  }
}

TEST(Match, AgnosticCanMatchFewerThanExact) {
  // p0 (ending) is 1 px from g0 (bifurcation) and ~2.24 px from g1 (ending);
  // p1 (bifurcation) is 3 px from g0 and 5 px from g1.
  const MinutiaSet gt{B(0, 0), E(2, 0)};
  const MinutiaSet pred{E(0, 1), B(-3, 0)};
  const double tau_d = 4.0;
  EXPECT_EQ(match_minutiae(pred, gt, {tau_d, kPi / 9, TypeMode::Exact}).tp(), 2u);
  EXPECT_EQ(match_minutiae(pred, gt, {tau_d, kPi / 9, TypeMode::Agnostic}).tp(), 1u);
}

TEST(Metrics, Prf1Examples) {
  const auto r = prf1(2, 1, 1);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
  EXPECT_EQ(prf1(0, 0, 0), (EvalReport{0, 0, 0, 0.0, 0.0, 0.0}));
  const auto only_fp = prf1(0, 5, 0);
  EXPECT_EQ(only_fp.precision, 0.0);
  EXPECT_EQ(only_fp.recall, 0.0);
  EXPECT_EQ(only_fp.f1, 0.0);
  EXPECT_DOUBLE_EQ(prf1(3, 0, 0).f1, 1.0);
}

TEST(Metrics, HarmonicMeanOfPublishedRows) {
  auto harmonic = [](double p, double r) { return 2 * p * r / (p + r); };
  EXPECT_NEAR(harmonic(0.236, 0.436), 0.306, 5e-4);
}

TEST(Metrics, F1IsHarmonicMeanOverRandomCounts) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> c(0, 500);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t tp = 1 + c(rng), fp = c(rng), fn = c(rng);
    const auto r = prf1(tp, fp, fn);
    ASSERT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-12);
    ASSERT_GE(r.f1, 0.0);
    ASSERT_LE(r.f1, 1.0);
  }
}

TEST(Metrics, AggregateSumsCountsBeforeDividing) {
  Matching a, b;
  a.pairs.resize(3);
  a.unmatched_pred = {0};
  b.unmatched_gt = {0, 1, 2, 3};
  const auto r = aggregate({a, b});
  EXPECT_EQ(r, prf1(3, 1, 4));
  EXPECT_EQ(aggregate({}), prf1(0, 0, 0));
}

TEST(ExcludeBoundary, Examples) {
  const auto mask = full_mask(100, 100);
  EXPECT_EQ(exclude_boundary({E(0, 0)}, mask, 0.0).size(), 1u);
  // (10, 50) lies 11 px from the outside of the frame: inside margin 14.
  EXPECT_TRUE(exclude_boundary({E(10, 50)}, mask).empty());
  EXPECT_EQ(exclude_boundary({E(50, 50)}, mask).size(), 1u);
  EXPECT_TRUE(exclude_boundary({E(10, 10), E(15, 15)}, full_mask(20, 20)).empty());
  EXPECT_TRUE(exclude_boundary({E(-1, 5), E(5, 200)}, mask, 0.0).empty());
  EXPECT_THROW(exclude_boundary({}, mask, -1.0), ParameterError);
}

TEST(ExcludeBoundary, MatchesDistanceOracle) {
  std::mt19937_64 rng(5);
  const auto blobs = random_blobs(48, 40, rng);
  SegmentationMask mask(48, 40, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.pixels()[i] = blobs.pixels()[i];
  const auto pts = random_minutiae(rng, 400, 48, 40);
  for (double margin : {0.0, 2.0, 3.5, 6.0}) {
    const auto kept = exclude_boundary(pts, mask, margin);
    std::size_t expected = 0;
    for (const auto& p : pts) {
      const int x = static_cast<int>(std::round(p.x)), y = static_cast<int>(std::round(p.y));
      if (!mask.contains(x, y) || !mask(x, y)) continue;
      if (margin == 0.0 || brute_squared_distance(mask, x, y) > margin * margin) ++expected;
    }
    EXPECT_EQ(kept.size(), expected) << margin;
  }
}

TEST(Sweep, SingletonEqualsDirectEvaluation) {
  std::mt19937_64 rng(6);
  std::vector<MinutiaSet> preds, gts;
  std::vector<Matching> direct;
  for (int i = 0; i < 5; ++i) {
    gts.push_back(random_minutiae(rng, 20, 150, 150));
    preds.push_back(jittered_copy(gts.back(), rng, 10.0));
    direct.push_back(match_minutiae(preds.back(), gts.back(), {}));
  }
  const auto curve = sweep(preds, gts, {}, SweepAxis::TauD, {14.0});
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].report, aggregate(direct));
  EXPECT_EQ(sweep(preds, gts, {}, SweepAxis::TauTheta, {kPi / 9})[0].report, aggregate(direct));
}

TEST(Sweep, FullAngleIgnoresDirection) {
  std::mt19937_64 rng(7);
  std::vector<MinutiaSet> preds, gts;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (int i = 0; i < 20; ++i) {
    gts.push_back(random_minutiae(rng, 8, 60, 60));
    preds.push_back(random_minutiae(rng, 8, 60, 60));
    const auto ref = greedy_reference(preds.back(), gts.back(), 14.0, 10.0, true);
    tp += ref.size();
    fp += preds.back().size() - ref.size();
    fn += gts.back().size() - ref.size();
  }
  const auto curve = sweep(preds, gts, {}, SweepAxis::TauTheta, {kPi});
  EXPECT_EQ(curve[0].report, prf1(tp, fp, fn));
}

TEST(Sweep, F1NonDecreasingInDistance) {
  std::mt19937_64 rng(8);
  std::vector<double> values;
  for (int v = 1; v <= 40; ++v) values.push_back(v);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<MinutiaSet> preds, gts;
    for (int i = 0; i < 3; ++i) {
      gts.push_back(separated_minutiae(rng, 6, 400, 400, 2 * 40.0));
      preds.push_back(jittered_copy(gts.back(), rng, 15.0));
    }
    const auto curve = sweep(preds, gts, {}, SweepAxis::TauD, values);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      EXPECT_GE(curve[i].report.f1, curve[i - 1].report.f1);
    }
  }
}

TEST(Sweep, LengthMismatchAndCsv) {
  EXPECT_THROW(sweep({{}}, {}, {}, SweepAxis::TauD, {1.0}), ParameterError);
  const std::vector<SweepPoint> curve{{5.0, prf1(1, 1, 0)}, {0.25, prf1(0, 0, 0)}};
  std::ostringstream td, tt;
  write_sweep_csv(td, SweepAxis::TauD, curve);
  EXPECT_EQ(td.str(), "td,tp,fp,fn,precision,recall,f1\n5,1,1,0,0.5,1,0.6666666666666666\n"
                      "0.25,0,0,0,0,0,0\n");
  write_sweep_csv(tt, SweepAxis::TauTheta, {});
  EXPECT_EQ(tt.str(), "ttheta,tp,fp,fn,precision,recall,f1\n");
}

TEST(Names, TypeModeAndAxis) {
  EXPECT_EQ(to_string(TypeMode::Exact), "exact");
  EXPECT_EQ(to_string(TypeMode::Agnostic), "agnostic");
  EXPECT_EQ(parse_type_mode("agnostic"), TypeMode::Agnostic);
  EXPECT_THROW(parse_type_mode("Exact"), ParameterError);
  EXPECT_EQ(to_string(SweepAxis::TauD), "td");
  EXPECT_EQ(to_string(SweepAxis::TauTheta), "ttheta");
}

TEST(Tversky, HandEvaluatedCase) {
  EnhancedImage gt(2, 2, 0.0f), e(2, 2, 0.0f);
  gt(0, 0) = gt(0, 1) = 1.0f;  // [1,0;1,0]
  e(0, 0) = e(1, 0) = 1.0f;    // [1,1;0,0]
  const auto t = tversky_terms(e, gt, full_mask(2, 2));
  EXPECT_EQ(t.tra, 1.0);
  EXPECT_EQ(t.fra, 1.0);
  EXPECT_EQ(t.fva, 1.0);
  EXPECT_DOUBLE_EQ(tversky_loss(e, gt, full_mask(2, 2), {0.7}), 0.5);
  EXPECT_DOUBLE_EQ(tversky_similarity(e, gt, full_mask(2, 2), {0.7}), 0.5);
}

TEST(Tversky, PerfectAndComplement) {
  const auto a = ridge_indicator(32, 32, 0.4, 7.0, 0.3);
  EnhancedImage complement = a;
  for (auto& v : complement.pixels()) v = 1.0f - v;
  const auto mask = full_mask(32, 32);
  EXPECT_EQ(tversky_loss(a, a, mask), 0.0);
  EXPECT_EQ(tversky_loss(complement, a, mask), 1.0);
}

TEST(Tversky, ZeroDenominator) {
  const auto mask = full_mask(4, 4);
  const EnhancedImage zero(4, 4, 0.0f), one(4, 4, 1.0f);
  EXPECT_EQ(tversky_loss(zero, zero, mask), 0.0);
  // alpha 1 ignores false ridge, so only the prediction mass decides.
  EXPECT_EQ(tversky_loss(zero, one, mask, {1.0}), 1.0);
  EXPECT_EQ(tversky_loss(TverskyTerms{0, 0, 0, 0}), 0.0);
  EXPECT_EQ(tversky_loss(TverskyTerms{0, 0, 0, 2.5}), 1.0);
}

TEST(Tversky, RangeMonotonicityAndSymmetry) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::uniform_real_distribution<double> t(0.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    EnhancedImage a(16, 16), b(16, 16);
    for (auto& v : a.pixels()) v = u(rng);
    for (auto& v : b.pixels()) v = u(rng);
    const auto mask = full_mask(16, 16);
    const double alpha = u(rng);
    const double l = tversky_loss(a, b, mask, {alpha});
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
    EXPECT_NEAR(l, tversky_loss(b, a, mask, {1.0 - alpha}), 1e-9);

    const TverskyTerms base{1.0 + t(rng), t(rng), t(rng), 1.0};
    const double a2 = 0.05 + 0.9 * u(rng);
    auto more_fra = base;
    more_fra.fra += 1.0;
    auto more_fva = base;
    more_fva.fva += 1.0;
    EXPECT_GT(tversky_loss(more_fra, {a2}), tversky_loss(base, {a2}));
    EXPECT_GT(tversky_loss(more_fva, {a2}), tversky_loss(base, {a2}));
  }
}

TEST(Tversky, MaskRestrictsSums) {
  EnhancedImage a(3, 1, 1.0f), b(3, 1, 0.0f);
  b(0, 0) = 1.0f;
  SegmentationMask m(3, 1, 0);
  m(0, 0) = 1;
  EXPECT_EQ(tversky_loss(a, b, m), 0.0);
}

TEST(Tversky, Errors) {
  const auto mask = full_mask(4, 4);
  EnhancedImage bad(4, 4, 0.0f);
  bad(1, 1) = 1.5f;
  EXPECT_THROW(tversky_loss(bad, EnhancedImage(4, 4, 0.0f), mask), ParameterError);
  EXPECT_THROW(tversky_loss(EnhancedImage(4, 4, 0.0f), EnhancedImage(4, 4, 0.0f),
                            SegmentationMask(4, 4, 0)),
               ParameterError);
  EXPECT_THROW(tversky_loss(EnhancedImage(4, 4, 0.0f), EnhancedImage(3, 4, 0.0f), mask),
               ParameterError);
  EXPECT_THROW((TverskyParams{1.1}.validate()), ParameterError);
  EXPECT_THROW((TverskyParams{-0.1}.validate()), ParameterError);
  EXPECT_DOUBLE_EQ(TverskyParams{}.alpha, 0.7);
}
