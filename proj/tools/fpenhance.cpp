// Batch front end: enhance, gt-enhance, minutiae, evaluate, sweep, augment,
// bank and run.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpe/augment.hpp"
#include "fpe/io.hpp"
#include "fpe/parallel.hpp"
#include "fpe/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fpe;

namespace {

constexpr const char* kVersion = "1.0.0";

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// "a:b:step" inclusive of b (within rounding), or a comma-separated list.
std::vector<double> parse_values(const std::string& text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ParameterError("--values: invalid number '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<std::string_view> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::string_view rest = text;
  while (true) {
    const auto pos = rest.find(sep);
    parts.push_back(rest.substr(0, pos));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) throw ParameterError("--values: expected start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || b < a) throw ParameterError("--values: need step > 0 and stop >= start");
    const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
  } else {
    for (auto p : parts) out.push_back(number(p));
  }
  return out;
}

PipelineConfig resolve_config(const std::string& path, int threads) {
  PipelineConfig c = path.empty() ? PipelineConfig{} : load_config(path);
  if (threads > 0) c.threads = c.enhance_threads = threads;
  c.validate();
  return c;
}

// Ids of files named "<id><suffix>" in dir, sorted.
std::vector<std::string> ids_in(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!e.is_regular_file() || name.size() <= suffix.size()) continue;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

struct EvalSet {
  std::vector<std::string> ids;
  std::vector<MinutiaSet> pred, gt;
};

// Reads <id>.min from pred and gt dirs and <id>.png masks; applies the
// boundary exclusion to both sides.
EvalSet load_eval_set(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& mask_dir,
                      double margin) {
  EvalSet s;
  for (const auto& id : ids_in(gt_dir, ".min")) {
    const auto mask = io::read_mask_png(mask_dir / (id + ".png"));
    const auto pred_path = pred_dir / (id + ".min");
    const MinutiaSet pred = fs::exists(pred_path) ? io::read_minutiae(pred_path) : MinutiaSet{};
    s.ids.push_back(id);
    s.pred.push_back(exclude_boundary(pred, mask, margin));
    s.gt.push_back(exclude_boundary(io::read_minutiae(gt_dir / (id + ".min")), mask, margin));
  }
  if (s.ids.empty()) throw ParameterError("no inputs");
  return s;
}

// Fields for an image: loaded when given, estimated otherwise.
std::pair<OrientationField, FrequencyMap> fields_for(const GrayImage& image,
                                                     const SegmentationMask& mask,
                                                     const std::string& orient_path,
                                                     const std::string& freq_path,
                                                     const PipelineConfig& c) {
  auto orient = orient_path.empty() ? estimate_orientation(image, mask, c.orientation)
                                    : io::read_orientation(orient_path);
  auto freq = freq_path.empty() ? estimate_frequency(image, mask, orient, c.frequency)
                                : io::read_frequency(freq_path);
  return {std::move(orient), std::move(freq)};
}

std::string kernel_file_name(std::size_t index) {
  std::string digits = std::to_string(index);
  return "kernel_" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits + ".png";
}

// Weights min-max stretched to 0..255 for viewing.
GrayImage kernel_image(const GaborKernel& k) {
  const auto [lo, hi] = std::minmax_element(k.weights.begin(), k.weights.end());
  GrayImage img(k.size, k.size, 0);
  for (std::size_t i = 0; i < k.weights.size(); ++i) {
    const double v = (k.weights[i] - *lo) / (*hi - *lo);
    img.pixels()[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual Gabor fingerprint enhancement and minutiae evaluation"};
  app.require_subcommand(0, 1);
  std::string config_path;
  int threads = 0;
  bool version = false;
  app.add_option("--config", config_path, "pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--version", version, "print version and resolved-config fingerprint");

  // enhance
  auto* enh = app.add_subcommand("enhance", "enhance one fingerprint image");
  std::string e_image, e_mask, e_orient, e_freq, e_out, e_orient_out, e_freq_out;
  std::string e_mode = "binary";
  enh->add_option("--input,--image", e_image, "fingerprint PNG, dark ridges")
      ->required()
      ->check(CLI::ExistingFile);
  enh->add_option("--mask", e_mask)->required()->check(CLI::ExistingFile);
  enh->add_option("--orient", e_orient, "orientation field file (estimated if absent)");
  enh->add_option("--freq", e_freq, "frequency map file (estimated if absent)");
  enh->add_option("--out", e_out, "enhanced PNG")->required();
  enh->add_option("--orient-out", e_orient_out, "write the orientation field used");
  enh->add_option("--freq-out", e_freq_out, "write the frequency map used");
  enh->add_option("--mode", e_mode, "binary|response")->check(CLI::IsMember({"binary", "response"}));

  // gt-enhance
  auto* gte = app.add_subcommand("gt-enhance", "ground-truth enhanced image from a skeleton");
  std::string g_skel, g_mask, g_orient, g_freq, g_out, g_orient_out, g_freq_out;
  gte->add_option("--skeleton", g_skel, "skeleton PNG, nonzero = ridge")->required()->check(CLI::ExistingFile);
  gte->add_option("--mask", g_mask)->required()->check(CLI::ExistingFile);
  gte->add_option("--orient", g_orient, "orientation field (estimated from the skeleton if absent)");
  gte->add_option("--freq", g_freq, "frequency map (measured on the skeleton if absent)");
  gte->add_option("--out", g_out, "enhanced PNG")->required();
  gte->add_option("--orient-out", g_orient_out);
  gte->add_option("--freq-out", g_freq_out);

  // minutiae
  auto* min = app.add_subcommand("minutiae", "extract minutiae from an enhanced image");
  std::string m_enh, m_mask, m_out;
  std::optional<int> m_min_spur;
  min->add_option("--input,--enhanced", m_enh, "enhanced PNG, bright = ridge")
      ->required()
      ->check(CLI::ExistingFile);
  min->add_option("--min-spur", m_min_spur, "spur pruning length, pixels")->check(CLI::NonNegativeNumber);
  min->add_option("--mask", m_mask)->required()->check(CLI::ExistingFile);
  min->add_option("--out", m_out, "minutiae text file")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "match predicted against ground-truth minutiae");
  std::string v_pred, v_gt, v_mask, v_report, v_groups, v_type;
  std::optional<double> v_td, v_ttheta_deg, v_margin;
  for (auto* sc : {ev}) {
    sc->add_option("--pred", v_pred, "dir of <id>.min")->required();
    sc->add_option("--gt", v_gt, "dir of <id>.min")->required();
    sc->add_option("--mask", v_mask, "dir of <id>.png")->required();
  }
  ev->add_option("--td", v_td, "distance threshold, pixels");
  ev->add_option("--ttheta-deg", v_ttheta_deg, "direction threshold, degrees");
  ev->add_option("--type", v_type, "exact|agnostic")->check(CLI::IsMember({"exact", "agnostic"}));
  ev->add_option("--margin", v_margin, "boundary exclusion, pixels");
  ev->add_option("--report", v_report, "JSON report")->required();
  ev->add_option("--groups", v_groups, "JSON object id -> group");

  // sweep
  auto* sw = app.add_subcommand("sweep", "evaluate over a range of one threshold");
  std::string s_pred, s_gt, s_mask, s_axis = "td", s_values, s_out, s_type;
  std::optional<double> s_td, s_ttheta_deg, s_margin;
  sw->add_option("--pred", s_pred)->required();
  sw->add_option("--gt", s_gt)->required();
  sw->add_option("--mask", s_mask)->required();
  sw->add_option("--axis", s_axis, "td|ttheta")->check(CLI::IsMember({"td", "ttheta"}));
  sw->add_option("--values", s_values, "start:stop:step or a,b,c (ttheta in degrees)")->required();
  sw->add_option("--td", s_td);
  sw->add_option("--ttheta-deg", s_ttheta_deg);
  sw->add_option("--type", s_type)->check(CLI::IsMember({"exact", "agnostic"}));
  sw->add_option("--margin", s_margin);
  sw->add_option("--out", s_out, "CSV output")->required();

  // augment
  auto* aug = app.add_subcommand("augment", "augment every sample in a directory");
  std::string a_in, a_spec, a_out;
  std::uint64_t a_seed = 0;
  aug->add_option("--in", a_in, "dir of <id>.png, <id>.mask.png, <id>.orient, <id>.freq")->required();
  aug->add_option("--spec", a_spec, "AugmentSpec JSON");
  aug->add_option("--seed", a_seed, "base seed");
  aug->add_option("--out", a_out)->required();

  // bank
  auto* bank_cmd = app.add_subcommand("bank", "describe the filter bank");
  std::string b_dump;
  bool b_weights = false;
  bank_cmd->add_option("--dump", b_dump, "directory for kernel PNGs and bank.json");
  bank_cmd->add_flag("--weights", b_weights, "include kernel weights in the JSON");

  // run
  auto* run = app.add_subcommand("run", "process a manifest end to end");
  std::string r_manifest, r_report, r_timings, r_out;
  run->add_option("--manifest", r_manifest)->required()->check(CLI::ExistingFile);
  run->add_option("--report", r_report, "JSON report")->required();
  run->add_option("--timings", r_timings, "per-stage timings JSON");
  run->add_option("--out", r_out, "output directory (overrides config)");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig config = resolve_config(config_path, threads);
    if (version) {
      std::cout << "fpenhance " << kVersion << " config " << config_fingerprint(config) << '\n';
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 0;
    }
    const auto bank_of = [&] { return GaborBank::build(config.orientation_count, config.periods); };

    if (*enh) {
      const auto image = io::read_gray_png(e_image);
      const auto mask = io::read_mask_png(e_mask);
      const auto [orient, freq] = fields_for(image, mask, e_orient, e_freq, config);
      const EnhanceOptions opts{e_mode == "response" ? OutputMode::Response : OutputMode::Binary,
                                config.strategy, config.enhance_threads};
      io::write_enhanced_png(e_out, enhance_gbfen(image, mask, orient, freq, bank_of(), opts));
      if (!e_orient_out.empty()) io::write_orientation(e_orient_out, orient);
      if (!e_freq_out.empty()) io::write_frequency(e_freq_out, freq);
    } else if (*gte) {
      const auto skel = io::read_gray_png(g_skel);
      const auto mask = io::read_mask_png(g_mask);
      OrientationField orient;
      if (g_orient.empty()) {
        // Ridges drawn dark for the gradient estimator.
        GrayImage drawn(skel.width(), skel.height());
        for (std::size_t i = 0; i < drawn.size(); ++i) drawn.pixels()[i] = skel.pixels()[i] ? 0 : 255;
        orient = estimate_orientation(drawn, mask, config.orientation);
      } else {
        orient = io::read_orientation(g_orient);
      }
      const auto freq = g_freq.empty()
                            ? frequency_from_skeleton(skel, orient, mask, config.frequency)
                            : io::read_frequency(g_freq);
      const EnhanceOptions opts{OutputMode::Binary, config.strategy, config.enhance_threads};
      io::write_enhanced_png(g_out, gt_enhance(skel, orient, freq, mask, bank_of(), opts));
      if (!g_orient_out.empty()) io::write_orientation(g_orient_out, orient);
      if (!g_freq_out.empty()) io::write_frequency(g_freq_out, freq);
    } else if (*min) {
      const auto gray = io::read_gray_png(m_enh);
      const auto mask = io::read_mask_png(m_mask);
      EnhancedImage enhanced(gray.width(), gray.height());
      for (std::size_t i = 0; i < gray.size(); ++i) enhanced.pixels()[i] = gray.pixels()[i] / 255.0f;
      DetectParams detect = config.detect;
      if (m_min_spur) detect.min_spur = *m_min_spur;
      io::write_minutiae(m_out, extract_minutiae(enhanced, mask, detect, config.binarize_threshold));
    } else if (*ev) {
      MatchCriteria crit = config.match;
      if (v_td) crit.tau_d = *v_td;
      if (v_ttheta_deg) crit.tau_theta = *v_ttheta_deg * std::numbers::pi / 180.0;
      if (!v_type.empty()) crit.type_mode = parse_type_mode(v_type);
      crit.validate();
      const double margin = v_margin.value_or(config.margin);
      const auto set = load_eval_set(v_pred, v_gt, v_mask, margin);
      std::map<std::string, std::string> groups;
      if (!v_groups.empty()) groups = read_json(v_groups).get<std::map<std::string, std::string>>();

      json images = json::array();
      std::vector<Matching> all;
      std::vector<std::string> group_order;
      std::map<std::string, std::vector<Matching>> by_group;
      for (std::size_t i = 0; i < set.ids.size(); ++i) {
        auto m = match_minutiae(set.pred[i], set.gt[i], crit);
        json e{{"id", set.ids[i]}, {"eval", to_json(prf1(m.tp(), m.fp(), m.fn()))}};
        if (const auto it = groups.find(set.ids[i]); it != groups.end()) {
          e["group"] = it->second;
          if (!by_group.count(it->second)) group_order.push_back(it->second);
          by_group[it->second].push_back(m);
        }
        images.push_back(std::move(e));
        all.push_back(std::move(m));
      }
      json group_reports = json::array();
      for (const auto& g : group_order) {
        json e = to_json(aggregate(by_group[g]));
        e["group"] = g;
        e["images"] = by_group[g].size();
        group_reports.push_back(std::move(e));
      }
      const json report{{"criteria",
                         {{"tau_d", crit.tau_d},
                          {"tau_theta", crit.tau_theta},
                          {"type_mode", to_string(crit.type_mode)},
                          {"margin", margin}}},
                        {"images", std::move(images)},
                        {"aggregate", to_json(aggregate(all))},
                        {"groups", std::move(group_reports)}};
      write_text(v_report, report.dump(2) + "\n");
    } else if (*sw) {
      MatchCriteria crit = config.match;
      if (s_td) crit.tau_d = *s_td;
      if (s_ttheta_deg) crit.tau_theta = *s_ttheta_deg * std::numbers::pi / 180.0;
      if (!s_type.empty()) crit.type_mode = parse_type_mode(s_type);
      const SweepAxis axis = s_axis == "td" ? SweepAxis::TauD : SweepAxis::TauTheta;
      auto values = parse_values(s_values);
      if (axis == SweepAxis::TauTheta) {
        for (auto& v : values) v *= std::numbers::pi / 180.0;
      }
      const auto set = load_eval_set(s_pred, s_gt, s_mask, s_margin.value_or(config.margin));
      std::ostringstream csv;
      write_sweep_csv(csv, axis, sweep(set.pred, set.gt, crit, axis, values));
      write_text(s_out, csv.str());
    } else if (*aug) {
      const AugmentSpec base = a_spec.empty() ? AugmentSpec{} : augment_spec_from_json(read_json(a_spec));
      std::vector<std::string> ids;
      for (const auto& id : ids_in(a_in, ".png")) {
        if (!id.ends_with(".mask") && !id.ends_with(".skel")) ids.push_back(id);
      }
      if (ids.empty()) throw ParameterError("no inputs");
      const fs::path in = a_in, out = a_out;
      fs::create_directories(out);
      std::vector<std::string> errors(ids.size());
      parallel_chunks(static_cast<int>(ids.size()), config.threads, [&](int begin, int end, int) {
        for (int i = begin; i < end; ++i) {
          const auto& id = ids[i];
          try {
            Sample s;
            s.image = io::read_gray_png(in / (id + ".png"));
            s.mask = io::read_mask_png(in / (id + ".mask.png"));
            s.orient = io::read_orientation(in / (id + ".orient"));
            s.freq = io::read_frequency(in / (id + ".freq"));
            if (fs::exists(in / (id + ".skel.png"))) s.skeleton = io::read_gray_png(in / (id + ".skel.png"));
            AugmentSpec spec = base;
            spec.seed = a_seed ^ fnv1a(id);
            const auto a = augment(s, spec);
            io::write_gray_png(out / (id + ".png"), a.image);
            io::write_mask_png(out / (id + ".mask.png"), a.mask);
            io::write_orientation(out / (id + ".orient"), a.orient);
            io::write_frequency(out / (id + ".freq"), a.freq);
            if (a.skeleton) io::write_gray_png(out / (id + ".skel.png"), *a.skeleton);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      });
      std::size_t failed = 0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (errors[i].empty()) continue;
        ++failed;
        std::cerr << ids[i] << ": " << errors[i] << '\n';
      }
      return failed == ids.size() ? 1 : 0;
    } else if (*bank_cmd) {
      const auto bank = bank_of();
      json kernels = json::array();
      for (std::size_t i = 0; i < bank.size(); ++i) {
        const auto& k = bank.kernel(i);
        json e{{"index", i},     {"theta", k.theta}, {"freq", k.freq},
               {"sigma", k.sigma}, {"size", k.size},  {"period", 1.0 / k.freq},
               {"file", kernel_file_name(i)}};
        if (b_weights) e["weights"] = k.weights;
        kernels.push_back(std::move(e));
      }
      const json j{{"orientation_count", bank.orientation_count()},
                   {"frequencies", std::vector<double>(bank.frequencies().begin(), bank.frequencies().end())},
                   {"kernels", std::move(kernels)}};
      if (b_dump.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        const fs::path dir = b_dump;
        fs::create_directories(dir);
        for (std::size_t i = 0; i < bank.size(); ++i) {
          io::write_gray_png(dir / kernel_file_name(i), kernel_image(bank.kernel(i)));
        }
        write_text(dir / "bank.json", j.dump(2) + "\n");
      }
    } else if (*run) {
      PipelineConfig c = config;
      if (!r_out.empty()) c.output_dir = r_out;
      const auto result = run_pipeline(c, load_manifest(r_manifest));
      write_text(r_report, report_json(c, result).dump(2) + "\n");
      if (!r_timings.empty()) write_text(r_timings, timings_json(result).dump(2) + "\n");
      for (const auto& r : result.images) {
        if (!r.ok) std::cerr << r.id << ": " << r.error << '\n';
      }
      return exit_status(result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
