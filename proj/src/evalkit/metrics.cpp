#include <algorithm>
#include <charconv>
#include <cmath>

#include "fpe/evalkit.hpp"

namespace fpe {
namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

EvalReport prf1(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalReport r{tp, fp, fn, 0.0, 0.0, 0.0};
  const double t = static_cast<double>(tp);
  r.precision = ratio(t, t + static_cast<double>(fp));
  r.recall = ratio(t, t + static_cast<double>(fn));
  r.f1 = ratio(2.0 * t, 2.0 * t + static_cast<double>(fp) + static_cast<double>(fn));
  return r;
}

EvalReport aggregate(const std::vector<Matching>& matchings) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& m : matchings) {
    tp += m.tp();
    fp += m.fp();
    fn += m.fn();
  }
  return prf1(tp, fp, fn);
}

std::vector<SweepPoint> sweep(const std::vector<MinutiaSet>& pred_sets,
                              const std::vector<MinutiaSet>& gt_sets, const MatchCriteria& base,
                              SweepAxis axis, const std::vector<double>& values) {
  if (pred_sets.size() != gt_sets.size()) {
    throw ParameterError("sweep: " + std::to_string(pred_sets.size()) + " predicted sets but " +
                         std::to_string(gt_sets.size()) + " ground-truth sets");
  }
  std::vector<SweepPoint> curve;
  curve.reserve(values.size());
  for (double v : values) {
    MatchCriteria crit = base;
    (axis == SweepAxis::TauD ? crit.tau_d : crit.tau_theta) = v;
    std::vector<Matching> ms;
    ms.reserve(pred_sets.size());
    for (std::size_t i = 0; i < pred_sets.size(); ++i) {
      ms.push_back(match_minutiae(pred_sets[i], gt_sets[i], crit));
    }
    curve.push_back({v, aggregate(ms)});
  }
  return curve;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& curve) {
  out << to_string(axis) << ",tp,fp,fn,precision,recall,f1\n";
  for (const auto& p : curve) {
    out << shortest(p.value) << ',' << p.report.tp << ',' << p.report.fp << ',' << p.report.fn
        << ',' << shortest(p.report.precision) << ',' << shortest(p.report.recall) << ','
        << shortest(p.report.f1) << '\n';
  }
}

std::string to_string(TypeMode mode) { return mode == TypeMode::Exact ? "exact" : "agnostic"; }

TypeMode parse_type_mode(const std::string& text) {
  if (text == "exact") return TypeMode::Exact;
  if (text == "agnostic") return TypeMode::Agnostic;
  throw ParameterError("type mode must be exact or agnostic, got '" + text + "'");
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::TauD ? "td" : "ttheta"; }

void TverskyParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("tversky: alpha must be in [0, 1]");
}

TverskyTerms tversky_terms(const EnhancedImage& reference, const EnhancedImage& prediction,
                           const SegmentationMask& mask) {
  require_same_size("tversky", reference, prediction, mask);
  require_foreground("tversky", mask);
  TverskyTerms t;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.pixels()[i]) continue;
    const double e = reference.pixels()[i];
    const double p = prediction.pixels()[i];
    if (!(e >= 0.0 && e <= 1.0) || !(p >= 0.0 && p <= 1.0)) {
      throw ParameterError("tversky: values must lie in [0, 1]");
    }
    t.tra += e * p;
    t.fra += e * (1.0 - p);
    t.fva += (1.0 - e) * p;
    t.pred_mass += p;
  }
  return t;
}

double tversky_loss(const TverskyTerms& terms, const TverskyParams& params) {
  params.validate();
  const double den = terms.tra + params.alpha * terms.fra + (1.0 - params.alpha) * terms.fva;
  if (den == 0.0) return terms.pred_mass > 0.0 ? 1.0 : 0.0;
  return std::clamp(1.0 - terms.tra / den, 0.0, 1.0);
}

double tversky_loss(const EnhancedImage& reference, const EnhancedImage& prediction,
                    const SegmentationMask& mask, const TverskyParams& params) {
  params.validate();
  return tversky_loss(tversky_terms(reference, prediction, mask), params);
}

double tversky_similarity(const EnhancedImage& reference, const EnhancedImage& prediction,
                          const SegmentationMask& mask, const TverskyParams& params) {
  return 1.0 - tversky_loss(reference, prediction, mask, params);
}

}  // namespace fpe
