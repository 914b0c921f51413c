#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "fpe/evalkit.hpp"
#include "fpe/mask_ops.hpp"

namespace fpe {

void MatchCriteria::validate() const {
  if (!(tau_d > 0.0) || !std::isfinite(tau_d)) {
    throw ParameterError("match criteria: tau_d must be > 0");
  }
  if (!(tau_theta > 0.0) || tau_theta > std::numbers::pi) {
    throw ParameterError("match criteria: tau_theta must be in (0, pi]");
  }
}

bool admissible(const Minutia& pred, const Minutia& gt, const MatchCriteria& crit) {
  if (crit.type_mode == TypeMode::Exact && pred.kind != gt.kind) return false;
  if (std::hypot(pred.x - gt.x, pred.y - gt.y) > crit.tau_d) return false;
  return direction_distance(pred.direction, gt.direction) <= crit.tau_theta;
}

Matching match_minutiae(const MinutiaSet& pred, const MinutiaSet& gt, const MatchCriteria& crit) {
  crit.validate();
  std::vector<MatchPair> candidates;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (admissible(pred[i], gt[j], crit)) {
        candidates.push_back({i, j, std::hypot(pred[i].x - gt[j].x, pred[i].y - gt[j].y)});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
    return std::tie(a.distance, a.pred, a.gt) < std::tie(b.distance, b.pred, b.gt);
  });

  Matching m;
  std::vector<bool> pred_used(pred.size()), gt_used(gt.size());
  for (const auto& c : candidates) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = gt_used[c.gt] = true;
    m.pairs.push_back(c);
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred_used[i]) m.unmatched_pred.push_back(i);
  }
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt_used[j]) m.unmatched_gt.push_back(j);
  }
  return m;
}

MinutiaSet exclude_boundary(const MinutiaSet& minutiae, const SegmentationMask& mask,
                            double margin) {
  if (!(margin >= 0.0)) throw ParameterError("exclude_boundary: margin must be >= 0");
  const auto inner = erode_mask(mask, margin);
  MinutiaSet out;
  for (const auto& m : minutiae) {
    const double rx = std::round(m.x), ry = std::round(m.y);
    if (!std::isfinite(rx) || !std::isfinite(ry)) continue;
    if (rx < 0 || ry < 0 || rx >= inner.width() || ry >= inner.height()) continue;
    if (inner(static_cast<int>(rx), static_cast<int>(ry))) out.push_back(m);
  }
  return out;
}

}  // namespace fpe
