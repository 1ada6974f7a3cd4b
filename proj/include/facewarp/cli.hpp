#ifndef FACEWARP_CLI_HPP
#define FACEWARP_CLI_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facewarp/error.hpp"
#include "facewarp/pipeline.hpp"

namespace facewarp {

// Raw command-line settings before they are turned into a WarpConfig.
struct CliOptions {
  std::string input;
  std::string landmarks;
  std::string output;
  std::optional<double> expand_a;
  std::string center_scheme = "landmark";
  std::optional<std::string> shrink_method;
  double alpha = 1.0;
  std::optional<double> strength;
  int grid = 4;
  int border_anchors = 4;
  double axis_epsilon = 1.0;
  GroupGains gains;
  int threads = default_thread_count();
  bool bench = false;
  int reps = 5;
  std::optional<std::string> bench_json;
};

namespace detail {

template <typename T>
T config_value(const nlohmann::json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ArgumentError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

// Overrides `opts` with every key present in a JSON config document. Keys use
// the flag names with '-' replaced by '_' (e.g. "expand_a", "shrink_method").
inline void merge_config_json(CliOptions& opts, const nlohmann::json& doc) {
  using detail::config_value;
  if (!doc.is_object()) throw ArgumentError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "input",  "landmarks",      "output",       "expand_a", "center_scheme", "shrink_method",
      "alpha",  "strength",       "grid",         "border_anchors", "axis_epsilon", "gains",
      "threads", "bench",         "reps",         "bench_json"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ArgumentError("unknown config key '" + key + "'");
    }
  }
  if (doc.contains("input")) opts.input = config_value<std::string>(doc, "input");
  if (doc.contains("landmarks")) opts.landmarks = config_value<std::string>(doc, "landmarks");
  if (doc.contains("output")) opts.output = config_value<std::string>(doc, "output");
  if (doc.contains("expand_a")) opts.expand_a = config_value<double>(doc, "expand_a");
  if (doc.contains("center_scheme")) {
    opts.center_scheme = config_value<std::string>(doc, "center_scheme");
  }
  if (doc.contains("shrink_method")) {
    opts.shrink_method = config_value<std::string>(doc, "shrink_method");
  }
  if (doc.contains("alpha")) opts.alpha = config_value<double>(doc, "alpha");
  if (doc.contains("strength")) opts.strength = config_value<double>(doc, "strength");
  if (doc.contains("grid")) opts.grid = config_value<int>(doc, "grid");
  if (doc.contains("border_anchors")) opts.border_anchors = config_value<int>(doc, "border_anchors");
  if (doc.contains("axis_epsilon")) opts.axis_epsilon = config_value<double>(doc, "axis_epsilon");
  if (doc.contains("gains")) {
    const auto& g = doc["gains"];
    if (!g.is_object()) throw ArgumentError("config key 'gains' must be an object");
    if (g.contains("nose")) opts.gains.nose = config_value<double>(g, "nose");
    if (g.contains("mouth")) opts.gains.mouth = config_value<double>(g, "mouth");
    if (g.contains("cheek")) opts.gains.cheek = config_value<double>(g, "cheek");
  }
  if (doc.contains("threads")) opts.threads = config_value<int>(doc, "threads");
  if (doc.contains("bench")) opts.bench = config_value<bool>(doc, "bench");
  if (doc.contains("reps")) opts.reps = config_value<int>(doc, "reps");
  if (doc.contains("bench_json")) opts.bench_json = config_value<std::string>(doc, "bench_json");
}

inline CenterScheme parse_center_scheme(const std::string& s) {
  if (s == "landmark") return CenterScheme::CenterLandmark;
  if (s == "midpoint") return CenterScheme::CanthusMidpoint;
  throw ArgumentError("unknown center scheme '" + s + "' (expected landmark|midpoint)");
}

inline MlsMethod parse_method_or_throw(const std::string& s) {
  if (auto m = parse_method(s)) return *m;
  throw ArgumentError("unknown MLS method '" + s + "' (expected affine|similarity|rigid)");
}

// Shrink parameters implied by the options; the method defaults to rigid when
// only benchmarking.
inline ShrinkStage shrink_stage_from(const CliOptions& opts) {
  ShrinkStage stage;
  stage.shrink.strength = opts.strength;
  stage.shrink.axis_epsilon = opts.axis_epsilon;
  stage.shrink.border_anchors = opts.border_anchors;
  stage.shrink.gains = opts.gains;
  stage.mls.alpha = opts.alpha;
  stage.mls.grid_spacing = opts.grid;
  if (opts.shrink_method) stage.mls.method = parse_method_or_throw(*opts.shrink_method);
  return stage;
}

inline WarpConfig to_warp_config(const CliOptions& opts) {
  WarpConfig cfg;
  cfg.input_image = opts.input;
  cfg.landmarks = opts.landmarks;
  cfg.output = opts.output;
  cfg.threads = opts.threads;
  if (opts.expand_a) {
    cfg.expansion = ExpansionParams{*opts.expand_a, parse_center_scheme(opts.center_scheme)};
  } else {
    parse_center_scheme(opts.center_scheme);
  }
  if (opts.shrink_method) cfg.shrink = shrink_stage_from(opts);
  return cfg;
}

}  // namespace facewarp

#endif  // FACEWARP_CLI_HPP
