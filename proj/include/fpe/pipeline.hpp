#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpe/augment.hpp"
#include "fpe/enhance.hpp"
#include "fpe/evalkit.hpp"
#include "fpe/fields.hpp"
#include "fpe/gabor.hpp"
#include "fpe/minutiae.hpp"

namespace fpe {

struct PipelineConfig {
  int orientation_count = 16;
  std::vector<double> periods = GaborBank::default_periods();
  OrientationParams orientation;
  FrequencyParams frequency;
  DetectParams detect;
  double binarize_threshold = 0.5;
  FilterStrategy strategy = FilterStrategy::Grouped;
  MatchCriteria match;
  double margin = 14.0;
  int threads = 1;          ///< files processed concurrently
  int enhance_threads = 1;  ///< workers inside one enhancement
  std::string output_dir;   ///< enhanced images and minutiae; empty = not written

  /// Re-runs every parameter check of the owning modules.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are a ParseError.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical JSON of the resolved config.
std::string config_fingerprint(const PipelineConfig& config);

/// Fields override `base`; unknown keys are a ParseError.
AugmentSpec augment_spec_from_json(const nlohmann::json& j, AugmentSpec base = {});
nlohmann::json to_json(const AugmentSpec& spec);

std::uint64_t fnv1a(std::string_view bytes);

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::optional<std::filesystem::path> orient;
  std::optional<std::filesystem::path> freq;
  std::optional<std::filesystem::path> gt_minutiae;
  std::string group;  ///< quality group such as "Good", "Bad", "Ugly"; may be empty
};

/// JSON array of {"id", "image", "mask", optional "orient", "freq",
/// "minutiae", "group"}. Relative paths resolve against `base_dir`.
std::vector<ManifestEntry> manifest_from_json(const nlohmann::json& j,
                                              const std::filesystem::path& base_dir);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

struct StageTimes {
  double load = 0.0;
  double fields = 0.0;
  double enhance = 0.0;
  double extract = 0.0;
  double evaluate = 0.0;
  double write = 0.0;
  double total = 0.0;  ///< seconds
};

struct ImageResult {
  std::string id;
  std::string group;
  bool ok = false;
  std::string error;
  std::size_t minutiae = 0;  ///< extracted before boundary exclusion
  bool evaluated = false;
  std::size_t tp = 0, fp = 0, fn = 0;
  StageTimes times;
};

struct GroupReport {
  std::string group;
  std::size_t images = 0;
  EvalReport report;
};

struct PipelineResult {
  std::vector<ImageResult> images;
  EvalReport aggregate;
  std::vector<GroupReport> groups;  ///< in order of first appearance
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

/// load -> (estimate or load) fields -> enhance -> extract -> exclude
/// boundary -> match. Per-image failures are recorded and skipped. Throws
/// ParameterError("no inputs") for an empty manifest.
PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::vector<ManifestEntry>& manifest);

/// Deterministic report: resolved config, per-image results, aggregate and
/// group reports. Timings are kept out so reruns are byte-identical.
nlohmann::json report_json(const PipelineConfig& config, const PipelineResult& result);
nlohmann::json timings_json(const PipelineResult& result);

nlohmann::json to_json(const EvalReport& report);

/// 0 when at least one image succeeded, 1 otherwise.
int exit_status(const PipelineResult& result);

}  // namespace fpe
