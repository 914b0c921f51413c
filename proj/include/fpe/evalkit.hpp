#pragma once

#include <cstddef>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "fpe/minutia.hpp"
#include "fpe/raster.hpp"

namespace fpe {

enum class TypeMode {
  Exact,     ///< paired minutiae must have the same kind
  Agnostic,  ///< kind is ignored
};

struct MatchCriteria {
  double tau_d = 14.0;                        ///< max position distance, pixels
  double tau_theta = std::numbers::pi / 9.0;  ///< max direction difference, radians
  TypeMode type_mode = TypeMode::Exact;

  void validate() const;
};

struct MatchPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double distance = 0.0;
};

struct Matching {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_gt;

  std::size_t tp() const { return pairs.size(); }
  std::size_t fp() const { return unmatched_pred.size(); }
  std::size_t fn() const { return unmatched_gt.size(); }
};

/// Whether pred and gt may be paired under `crit`.
bool admissible(const Minutia& pred, const Minutia& gt, const MatchCriteria& crit);

/// One-to-one greedy pairing: admissible pairs are taken in ascending distance
/// order, ties broken by lower pred index then lower gt index.
Matching match_minutiae(const MinutiaSet& pred, const MinutiaSet& gt, const MatchCriteria& crit);

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const EvalReport&) const = default;
};

/// Precision, recall and F1 from counts; every 0/0 ratio is 0.
EvalReport prf1(std::size_t tp, std::size_t fp, std::size_t fn);

/// Counts summed over all matchings, then prf1.
EvalReport aggregate(const std::vector<Matching>& matchings);

/// Keeps the minutiae whose nearest pixel lies inside erode_mask(mask, margin).
/// Minutiae outside the raster are dropped. margin < 0 is a ParameterError.
MinutiaSet exclude_boundary(const MinutiaSet& minutiae, const SegmentationMask& mask,
                            double margin = 14.0);

enum class SweepAxis { TauD, TauTheta };

struct SweepPoint {
  double value = 0.0;
  EvalReport report;
};

/// For each value, overrides the chosen criterion and evaluates all images
/// with summed counts. Throws ParameterError when the set lists differ in length.
std::vector<SweepPoint> sweep(const std::vector<MinutiaSet>& pred_sets,
                              const std::vector<MinutiaSet>& gt_sets, const MatchCriteria& base,
                              SweepAxis axis, const std::vector<double>& values);

/// Header "<axis>,tp,fp,fn,precision,recall,f1" then one row per point.
void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& curve);

std::string to_string(TypeMode mode);
TypeMode parse_type_mode(const std::string& text);
std::string to_string(SweepAxis axis);

struct TverskyParams {
  double alpha = 0.7;  ///< weight on missed ridge (FRA); 1 - alpha weighs false ridge (FVA)

  void validate() const;
};

/// Agreement sums over the foreground between a reference E and a prediction Ê.
struct TverskyTerms {
  double tra = 0.0;        ///< sum E * Ê
  double fra = 0.0;        ///< sum E * (1 - Ê)
  double fva = 0.0;        ///< sum (1 - E) * Ê
  double pred_mass = 0.0;  ///< sum Ê
};

TverskyTerms tversky_terms(const EnhancedImage& reference, const EnhancedImage& prediction,
                           const SegmentationMask& mask);

/// 1 - TRA / (TRA + alpha FRA + (1 - alpha) FVA). With a zero denominator the
/// loss is 1 if the prediction has ridge mass and 0 otherwise.
double tversky_loss(const TverskyTerms& terms, const TverskyParams& params = {});

/// Throws ParameterError on size mismatch, values outside [0, 1], or an empty mask.
double tversky_loss(const EnhancedImage& reference, const EnhancedImage& prediction,
                    const SegmentationMask& mask, const TverskyParams& params = {});

/// 1 - tversky_loss.
double tversky_similarity(const EnhancedImage& reference, const EnhancedImage& prediction,
                          const SegmentationMask& mask, const TverskyParams& params = {});

}  // namespace fpe
