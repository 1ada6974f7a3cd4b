// facewarp: eye expansion and MLS face shrinking from 106-point landmarks.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "facewarp/cli.hpp"
#include "facewarp/facewarp.hpp"

namespace {

int run_bench(const facewarp::CliOptions& opts) {
  using namespace facewarp;
  try {
    if (opts.input.empty() || opts.landmarks.empty()) {
      throw ArgumentError("--bench needs --input and --landmarks");
    }
    const ShrinkStage stage = shrink_stage_from(opts);
    stage.shrink.validate();
    stage.mls.validate();
    RasterImage img = load_png(opts.input);
    const LandmarkSet lm = load_landmarks(opts.landmarks);
    require_landmarks_fit(lm, img);
    if (opts.expand_a) {
      img = expand_eyes(img, lm,
                        ExpansionParams{*opts.expand_a, parse_center_scheme(opts.center_scheme)},
                        opts.threads);
    }
    const BenchOutput out =
        bench(img, lm, stage, {MlsMethod::Affine, MlsMethod::Similarity, MlsMethod::Rigid},
              opts.reps, opts.threads);
    out.report.print_table(std::cout);
    const std::string json = out.report.to_json().dump();
    if (opts.bench_json) {
      std::ofstream f(*opts.bench_json);
      if (!(f << json << '\n')) {
        throw IoError("cannot write benchmark JSON '" + *opts.bench_json + "'");
      }
    } else {
      std::cout << json << '\n';
    }
    if (!opts.output.empty()) {
      for (std::size_t i = 0; i < out.images.size(); ++i) {
        if (out.report.timings[i].method == stage.mls.method) save_png(out.images[i], opts.output);
      }
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "facewarp: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace facewarp;
  CliOptions opts;
  std::string config_path;

  CLI::App app{"Facial image deformation: eye expansion and MLS face shrinking"};
  app.add_option("--input", opts.input, "input PNG image");
  app.add_option("--landmarks", opts.landmarks, "106-point landmark JSON");
  app.add_option("--output", opts.output, "output PNG image");
  app.add_option("--expand-a", opts.expand_a, "eye expansion strength in [-100, 100]");
  app.add_option("--center-scheme", opts.center_scheme, "eye center: landmark|midpoint")
      ->check(CLI::IsMember({"landmark", "midpoint"}));
  app.add_option("--shrink-method", opts.shrink_method, "MLS method: affine|similarity|rigid")
      ->check(CLI::IsMember({"affine", "similarity", "rigid"}));
  app.add_option("--alpha", opts.alpha, "MLS weight exponent")->capture_default_str();
  app.add_option("--strength", opts.strength, "shrink distance in pixels (default face width/60)");
  app.add_option("--grid", opts.grid, "MLS grid spacing in pixels")->capture_default_str();
  app.add_option("--border-anchors", opts.border_anchors, "fixed anchors per image edge")
      ->capture_default_str();
  app.add_option("--axis-epsilon", opts.axis_epsilon, "midline band half-width in pixels")
      ->capture_default_str();
  app.add_option("--threads", opts.threads, "worker threads")->capture_default_str();
  app.add_flag("--bench", opts.bench, "time affine, similarity and rigid shrinking");
  app.add_option("--reps", opts.reps, "benchmark repetitions (>= 3)")->capture_default_str();
  app.add_option("--bench-json", opts.bench_json, "write benchmark JSON here instead of stdout");
  app.add_option("--config", config_path, "JSON config whose keys override the flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadArguments;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot open config '" + config_path + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ArgumentError("malformed config '" + config_path + "': " + e.what());
      }
      merge_config_json(opts, doc);
    }
    if (opts.bench) return run_bench(opts);
    return run_pipeline(to_warp_config(opts), std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "facewarp: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
