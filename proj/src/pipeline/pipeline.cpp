#include <array>
#include <chrono>
#include <filesystem>

#include "fpe/io.hpp"
#include "fpe/parallel.hpp"
#include "fpe/pipeline.hpp"

namespace fpe {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  // Seconds since the previous lap.
  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  Clock::time_point last_ = Clock::now();
};

void process(const PipelineConfig& config, const GaborBank& bank, const ManifestEntry& entry,
             ImageResult& r) {
  const auto start = Clock::now();
  Stopwatch sw;
  const auto image = io::read_gray_png(entry.image);
  const auto mask = io::read_mask_png(entry.mask);
  require_same_size(entry.id.c_str(), image, mask);
  r.times.load = sw.lap();

  const auto orient = entry.orient ? io::read_orientation(*entry.orient)
                                   : estimate_orientation(image, mask, config.orientation);
  const auto freq = entry.freq ? io::read_frequency(*entry.freq)
                               : estimate_frequency(image, mask, orient, config.frequency);
  r.times.fields = sw.lap();

  const EnhanceOptions opts{OutputMode::Binary, config.strategy, config.enhance_threads};
  const auto enhanced = enhance_gbfen(image, mask, orient, freq, bank, opts);
  r.times.enhance = sw.lap();

  const auto minutiae = extract_minutiae(enhanced, mask, config.detect, config.binarize_threshold);
  r.minutiae = minutiae.size();
  r.times.extract = sw.lap();

  if (entry.gt_minutiae) {
    const auto gt = io::read_minutiae(*entry.gt_minutiae);
    const auto m = match_minutiae(exclude_boundary(minutiae, mask, config.margin),
                                  exclude_boundary(gt, mask, config.margin), config.match);
    r.evaluated = true;
    r.tp = m.tp();
    r.fp = m.fp();
    r.fn = m.fn();
  }
  r.times.evaluate = sw.lap();

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir = config.output_dir;
    std::filesystem::create_directories(dir);
    io::write_enhanced_png(dir / (entry.id + ".enhanced.png"), enhanced);
    io::write_minutiae(dir / (entry.id + ".min"), minutiae);
  }
  r.times.write = sw.lap();
  r.times.total = std::chrono::duration<double>(Clock::now() - start).count();
  r.ok = true;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::vector<ManifestEntry>& manifest) {
  config.validate();
  if (manifest.empty()) throw ParameterError("no inputs");
  const auto bank = GaborBank::build(config.orientation_count, config.periods);

  PipelineResult result;
  result.images.resize(manifest.size());
  parallel_chunks(static_cast<int>(manifest.size()), config.threads, [&](int begin, int end, int) {
    for (int i = begin; i < end; ++i) {
      auto& r = result.images[i];
      r.id = manifest[i].id;
      r.group = manifest[i].group;
      try {
        process(config, bank, manifest[i], r);
      } catch (const std::exception& e) {
        r = ImageResult{};
        r.id = manifest[i].id;
        r.group = manifest[i].group;
        r.error = e.what();
      }
    }
  });

  std::size_t tp = 0, fp = 0, fn = 0;
  std::vector<std::array<std::size_t, 4>> group_counts;  // images, tp, fp, fn
  for (const auto& r : result.images) {
    if (!r.ok) {
      ++result.failed;
      continue;
    }
    ++result.succeeded;
    if (!r.evaluated) continue;
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
    if (r.group.empty()) continue;
    std::size_t g = 0;
    while (g < result.groups.size() && result.groups[g].group != r.group) ++g;
    if (g == result.groups.size()) {
      result.groups.push_back({r.group, 0, {}});
      group_counts.push_back({0, 0, 0, 0});
    }
    auto& c = group_counts[g];
    ++c[0];
    c[1] += r.tp;
    c[2] += r.fp;
    c[3] += r.fn;
  }
  result.aggregate = prf1(tp, fp, fn);
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    const auto& c = group_counts[g];
    result.groups[g].images = c[0];
    result.groups[g].report = prf1(c[1], c[2], c[3]);
  }
  return result;
}

json to_json(const EvalReport& r) {
  return json{{"tp", r.tp},       {"fp", r.fp},         {"fn", r.fn},
              {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

json report_json(const PipelineConfig& config, const PipelineResult& result) {
  json images = json::array();
  for (const auto& r : result.images) {
    json e{{"id", r.id}, {"ok", r.ok}};
    if (!r.group.empty()) e["group"] = r.group;
    if (!r.ok) {
      e["error"] = r.error;
    } else {
      e["minutiae"] = r.minutiae;
      if (r.evaluated) e["eval"] = to_json(prf1(r.tp, r.fp, r.fn));
    }
    images.push_back(std::move(e));
  }
  json groups = json::array();
  for (const auto& g : result.groups) {
    json e = to_json(g.report);
    e["group"] = g.group;
    e["images"] = g.images;
    groups.push_back(std::move(e));
  }
  // Runtime-only settings stay out so reports match across thread counts.
  json echoed = to_json(config);
  echoed.erase("threads");
  echoed.erase("output_dir");
  echoed["enhance"].erase("threads");
  return json{{"config", std::move(echoed)},
              {"config_fingerprint", config_fingerprint(config)},
              {"images", std::move(images)},
              {"aggregate", to_json(result.aggregate)},
              {"groups", std::move(groups)},
              {"succeeded", result.succeeded},
              {"failed", result.failed}};
}

json timings_json(const PipelineResult& result) {
  json out = json::array();
  for (const auto& r : result.images) {
    if (!r.ok) continue;
    out.push_back({{"id", r.id},
                   {"load", r.times.load},
                   {"fields", r.times.fields},
                   {"enhance", r.times.enhance},
                   {"extract", r.times.extract},
                   {"evaluate", r.times.evaluate},
                   {"write", r.times.write},
                   {"total", r.times.total}});
  }
  return out;
}

int exit_status(const PipelineResult& result) { return result.succeeded > 0 ? 0 : 1; }

}  // namespace fpe
