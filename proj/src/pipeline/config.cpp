#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "fpe/pipeline.hpp"

namespace fpe {
namespace {

using json = nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ParseError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string strategy_name(FilterStrategy s) { return s == FilterStrategy::Naive ? "naive" : "grouped"; }

FilterStrategy parse_strategy(const std::string& text) {
  if (text == "naive") return FilterStrategy::Naive;
  if (text == "grouped") return FilterStrategy::Grouped;
  throw ParameterError("strategy must be naive or grouped, got '" + text + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  orientation.validate();
  frequency.validate();
  match.validate();
  if (orientation_count < 1) throw ParameterError("config: orientation_count must be >= 1");
  (void)GaborBank::build(orientation_count, periods);
  if (detect.min_spur < 0) throw ParameterError("config: min_spur must be >= 0");
  if (detect.trace_steps < 1) throw ParameterError("config: trace_steps must be >= 1");
  if (!(binarize_threshold > 0.0 && binarize_threshold <= 1.0)) {
    throw ParameterError("config: binarize_threshold must be in (0, 1]");
  }
  if (!(margin >= 0.0)) throw ParameterError("config: margin must be >= 0");
  if (threads < 1) throw ParameterError("config: threads must be >= 1");
  if (enhance_threads < 1) throw ParameterError("config: enhance threads must be >= 1");
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  try {
    check_keys(j, {"bank", "orientation", "frequency", "detect", "enhance", "eval", "threads",
                   "output_dir"},
               "config");
    if (j.contains("bank")) {
      const auto& b = j.at("bank");
      check_keys(b, {"orientation_count", "periods"}, "config.bank");
      read(b, "orientation_count", c.orientation_count);
      read(b, "periods", c.periods);
    }
    if (j.contains("orientation")) {
      const auto& o = j.at("orientation");
      check_keys(o, {"gradient_window", "coherence_floor"}, "config.orientation");
      read(o, "gradient_window", c.orientation.gradient_window);
      read(o, "coherence_floor", c.orientation.coherence_floor);
    }
    if (j.contains("frequency")) {
      const auto& f = j.at("frequency");
      check_keys(f, {"window_length", "window_width", "min_period", "max_period", "grid_step"},
                 "config.frequency");
      read(f, "window_length", c.frequency.window_length);
      read(f, "window_width", c.frequency.window_width);
      read(f, "min_period", c.frequency.min_period);
      read(f, "max_period", c.frequency.max_period);
      read(f, "grid_step", c.frequency.grid_step);
    }
    if (j.contains("detect")) {
      const auto& d = j.at("detect");
      check_keys(d, {"min_spur", "trace_steps", "binarize_threshold"}, "config.detect");
      read(d, "min_spur", c.detect.min_spur);
      read(d, "trace_steps", c.detect.trace_steps);
      read(d, "binarize_threshold", c.binarize_threshold);
    }
    if (j.contains("enhance")) {
      const auto& e = j.at("enhance");
      check_keys(e, {"strategy", "threads"}, "config.enhance");
      if (e.contains("strategy")) c.strategy = parse_strategy(e.at("strategy").get<std::string>());
      read(e, "threads", c.enhance_threads);
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      check_keys(e, {"tau_d", "tau_theta", "margin", "type_mode"}, "config.eval");
      read(e, "tau_d", c.match.tau_d);
      read(e, "tau_theta", c.match.tau_theta);
      read(e, "margin", c.margin);
      if (e.contains("type_mode")) {
        c.match.type_mode = parse_type_mode(e.at("type_mode").get<std::string>());
      }
    }
    read(j, "threads", c.threads);
    read(j, "output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const PipelineConfig& c) {
  return json{
      {"bank", {{"orientation_count", c.orientation_count}, {"periods", c.periods}}},
      {"orientation",
       {{"gradient_window", c.orientation.gradient_window},
        {"coherence_floor", c.orientation.coherence_floor}}},
      {"frequency",
       {{"window_length", c.frequency.window_length},
        {"window_width", c.frequency.window_width},
        {"min_period", c.frequency.min_period},
        {"max_period", c.frequency.max_period},
        {"grid_step", c.frequency.grid_step}}},
      {"detect",
       {{"min_spur", c.detect.min_spur},
        {"trace_steps", c.detect.trace_steps},
        {"binarize_threshold", c.binarize_threshold}}},
      {"enhance", {{"strategy", strategy_name(c.strategy)}, {"threads", c.enhance_threads}}},
      {"eval",
       {{"tau_d", c.match.tau_d},
        {"tau_theta", c.match.tau_theta},
        {"margin", c.margin},
        {"type_mode", to_string(c.match.type_mode)}}},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
  };
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(parse_file(path));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_fingerprint(const PipelineConfig& config) {
  // Thread counts and output paths do not affect results.
  json j = to_json(config);
  j.erase("threads");
  j.erase("output_dir");
  j["enhance"].erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

AugmentSpec augment_spec_from_json(const json& j, AugmentSpec s) {
  auto interval = [](const json& v) {
    if (!v.is_array() || v.size() != 2) throw ParseError("augment spec: range must be [lo, hi]");
    return Interval{v[0].get<double>(), v[1].get<double>()};
  };
  auto counts = [](const json& v) {
    if (!v.is_array() || v.size() != 2) throw ParseError("augment spec: count range must be [min, max]");
    return CountRange{v[0].get<int>(), v[1].get<int>()};
  };
  try {
    check_keys(j, {"translate_frac", "rotate_deg", "scale_frac", "hflip", "gamma_range",
                   "contrast_range", "morph", "scratches", "abrasions", "seed", "fill_value"},
               "augment spec");
    read(j, "translate_frac", s.translate_frac);
    read(j, "rotate_deg", s.rotate_deg);
    read(j, "scale_frac", s.scale_frac);
    read(j, "hflip", s.hflip);
    if (j.contains("gamma_range")) s.gamma_range = interval(j.at("gamma_range"));
    if (j.contains("contrast_range")) s.contrast_range = interval(j.at("contrast_range"));
    if (j.contains("morph")) s.morph = parse_morph(j.at("morph").get<std::string>());
    if (j.contains("scratches")) s.scratches = counts(j.at("scratches"));
    if (j.contains("abrasions")) s.abrasions = counts(j.at("abrasions"));
    read(j, "seed", s.seed);
    read(j, "fill_value", s.fill_value);
  } catch (const json::exception& e) {
    throw ParseError(std::string("augment spec: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const AugmentSpec& s) {
  return json{{"translate_frac", s.translate_frac},
              {"rotate_deg", s.rotate_deg},
              {"scale_frac", s.scale_frac},
              {"hflip", s.hflip},
              {"gamma_range", {s.gamma_range.lo, s.gamma_range.hi}},
              {"contrast_range", {s.contrast_range.lo, s.contrast_range.hi}},
              {"morph", to_string(s.morph)},
              {"scratches", {s.scratches.min, s.scratches.max}},
              {"abrasions", {s.abrasions.min, s.abrasions.max}},
              {"seed", s.seed},
              {"fill_value", s.fill_value}};
}

std::vector<ManifestEntry> manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_array()) throw ParseError("manifest: expected an array");
  auto resolve = [&](const json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  std::vector<ManifestEntry> out;
  try {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto& e = j[i];
      const std::string where = "manifest[" + std::to_string(i) + "]";
      check_keys(e, {"id", "image", "mask", "orient", "freq", "minutiae", "group"}, where);
      for (const char* required : {"id", "image", "mask"}) {
        if (!e.contains(required)) throw ParseError(where + ": missing '" + required + "'");
      }
      ManifestEntry m;
      m.id = e.at("id").get<std::string>();
      m.image = resolve(e.at("image"));
      m.mask = resolve(e.at("mask"));
      if (e.contains("orient")) m.orient = resolve(e.at("orient"));
      if (e.contains("freq")) m.freq = resolve(e.at("freq"));
      if (e.contains("minutiae")) m.gt_minutiae = resolve(e.at("minutiae"));
      read(e, "group", m.group);
      if (m.id.empty()) throw ParseError(where + ": empty id");
      for (const auto& prev : out) {
        if (prev.id == m.id) throw ParseError(where + ": duplicate id '" + m.id + "'");
      }
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(parse_file(path), path.parent_path());
}

}  // namespace fpe
