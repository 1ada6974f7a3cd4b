#ifndef FACEWARP_PIPELINE_HPP
#define FACEWARP_PIPELINE_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facewarp/error.hpp"
#include "facewarp/expansion.hpp"
#include "facewarp/imaging.hpp"
#include "facewarp/landmarks.hpp"
#include "facewarp/mls.hpp"
#include "facewarp/png_io.hpp"
#include "facewarp/shrink.hpp"

namespace facewarp {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitBadArguments = 2,
  kExitIo = 3,
  kExitValidation = 4,
  kExitDegenerateMls = 5,
};

struct ShrinkStage {
  ShrinkConfig shrink;
  MlsParams mls;
};

struct WarpConfig {
  std::filesystem::path input_image;
  std::filesystem::path landmarks;
  std::filesystem::path output;
  std::optional<ExpansionParams> expansion;
  std::optional<ShrinkStage> shrink;
  int threads = default_thread_count();

  void validate() const {
    if (input_image.empty() || landmarks.empty() || output.empty()) {
      throw ArgumentError("input image, landmark file and output paths are all required");
    }
    if (!expansion && !shrink) {
      throw ArgumentError("nothing to do: request eye expansion (--expand-a) and/or "
                          "shrinking (--shrink-method)");
    }
    if (threads < 1) throw ArgumentError("thread count must be at least 1");
    try {
      if (expansion) expansion->validate();
      if (shrink) {
        shrink->shrink.validate();
        shrink->mls.validate();
      }
    } catch (const ValidationError& e) {
      throw ArgumentError(e.what());
    }
  }
};

struct PipelineResult {
  RasterImage image;
  double expansion_seconds = 0.0;
  double shrink_seconds = 0.0;
  std::size_t control_pairs = 0;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(std::string("cannot open ") + what + " '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

// Rejects landmark sets that do not fit the image.
inline void require_landmarks_fit(const LandmarkSet& lm, const RasterImage& img) {
  const auto report = validate_against_image(lm, img.width(), img.height());
  for (const ValidationIssue& issue : report) {
    if (issue.kind != IssueKind::DegenerateEyeRadius) {
      throw ValidationError(issue.message);
    }
  }
}

// Control pairs of the shrink stage for a given frame.
inline ControlPairsResult shrink_control_pairs(const LandmarkSet& lm, const ShrinkConfig& cfg,
                                               int width, int height) {
  return plan_to_control_pairs(lm, moving_vectors(lm, cfg, width, height));
}

// Expansion first, then shrinking, on an in-memory image.
inline PipelineResult apply_pipeline(const RasterImage& img, const LandmarkSet& lm,
                                     const std::optional<ExpansionParams>& expansion,
                                     const std::optional<ShrinkStage>& shrink,
                                     int threads = default_thread_count()) {
  PipelineResult result{img};
  if (expansion) {
    const auto start = std::chrono::steady_clock::now();
    result.image = expand_eyes(result.image, lm, *expansion, threads);
    result.expansion_seconds = detail::seconds_since(start);
  }
  if (shrink) {
    auto pairs = shrink_control_pairs(lm, shrink->shrink, img.width(), img.height());
    result.diagnostics = std::move(pairs.diagnostics);
    result.control_pairs = pairs.pairs.size();
    const auto start = std::chrono::steady_clock::now();
    result.image = deform_image(result.image, pairs.pairs, shrink->mls, threads);
    result.shrink_seconds = detail::seconds_since(start);
  }
  return result;
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e)) return kExitBadArguments;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const DegenerateConfigurationError*>(&e)) return kExitDegenerateMls;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  return kExitInternal;
}

inline LandmarkSet load_landmarks(const std::filesystem::path& path) {
  return parse_landmarks(detail::read_file(path, "landmark file"));
}

// Reads the inputs, runs the pipeline and writes the output PNG. Prints a
// one-line summary to `out` and errors to `err`; returns the exit code.
inline int run_pipeline(const WarpConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const RasterImage img = load_png(cfg.input_image);
    const LandmarkSet lm = load_landmarks(cfg.landmarks);
    require_landmarks_fit(lm, img);
    const PipelineResult r = apply_pipeline(img, lm, cfg.expansion, cfg.shrink, cfg.threads);
    for (const std::string& d : r.diagnostics) err << "facewarp: note: " << d << '\n';
    save_png(r.image, cfg.output);

    out << img.width() << 'x' << img.height();
    if (cfg.expansion) {
      out << " expand(a=" << cfg.expansion->strength << ", "
          << (cfg.expansion->scheme == CenterScheme::CenterLandmark ? "landmark" : "midpoint")
          << ") " << std::fixed << std::setprecision(3) << r.expansion_seconds << "s";
      out.unsetf(std::ios::floatfield);
    }
    if (cfg.shrink) {
      out << " shrink(" << method_name(cfg.shrink->mls.method)
          << ", alpha=" << cfg.shrink->mls.alpha << ", grid=" << cfg.shrink->mls.grid_spacing
          << ", pairs=" << r.control_pairs << ") " << std::fixed << std::setprecision(3)
          << r.shrink_seconds << "s";
      out.unsetf(std::ios::floatfield);
    }
    out << " -> " << cfg.output.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "facewarp: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

// ---------------------------------------------------------------------------
// Benchmark

struct BenchTiming {
  MlsMethod method;
  double seconds;  // minimum over repetitions
};

struct BenchReport {
  int width = 0;
  int height = 0;
  std::size_t n_controls = 0;
  int grid_spacing = 0;
  int repetitions = 0;
  std::vector<BenchTiming> timings;

  double seconds(MlsMethod m) const {
    for (const BenchTiming& t : timings) {
      if (t.method == m) return t.seconds;
    }
    throw ValidationError("method " + std::string(method_name(m)) + " was not benchmarked");
  }

  nlohmann::json to_json() const {
    nlohmann::json times = nlohmann::json::object();
    for (const BenchTiming& t : timings) times[std::string(method_name(t.method))] = t.seconds;
    return {{"image", {{"w", width}, {"h", height}}},
            {"n_controls", n_controls},
            {"grid", grid_spacing},
            {"reps", repetitions},
            {"times_s", times}};
  }

  void print_table(std::ostream& os) const {
    os << "Deformation times (" << width << 'x' << height << ", " << n_controls
       << " control pairs, grid " << grid_spacing << ", min of " << repetitions << ")\n";
    for (const BenchTiming& t : timings) {
      os << "  " << std::left << std::setw(12) << method_name(t.method) << std::right
         << std::fixed << std::setprecision(4) << t.seconds << " s\n";
    }
    os.unsetf(std::ios::floatfield);
  }
};

struct BenchOutput {
  BenchReport report;
  std::vector<RasterImage> images;  // one per method, in request order
};

// Times the shrink deformation (backward-map construction plus resampling,
// no image I/O) under each method; reports the fastest of `repetitions` runs.
inline BenchOutput bench(const RasterImage& img, const LandmarkSet& lm, const ShrinkStage& stage,
                         const std::vector<MlsMethod>& methods, int repetitions,
                         int threads = default_thread_count()) {
  if (repetitions < 3) {
    throw ArgumentError("benchmark repetitions must be at least 3");
  }
  if (methods.empty()) {
    throw ArgumentError("no methods to benchmark");
  }
  const auto pairs = shrink_control_pairs(lm, stage.shrink, img.width(), img.height());
  BenchOutput out;
  out.report.width = img.width();
  out.report.height = img.height();
  out.report.n_controls = pairs.pairs.size();
  out.report.grid_spacing = stage.mls.grid_spacing;
  out.report.repetitions = repetitions;
  // Repetitions are interleaved across methods so slow drift in machine load
  // affects every method alike.
  std::vector<double> best(methods.size(), std::numeric_limits<double>::infinity());
  std::vector<std::optional<RasterImage>> results(methods.size());
  for (int r = 0; r < repetitions; ++r) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      MlsParams params = stage.mls;
      params.method = methods[k];
      const auto start = std::chrono::steady_clock::now();
      RasterImage warped = deform_image(img, pairs.pairs, params, threads);
      best[k] = std::min(best[k], detail::seconds_since(start));
      if (!results[k]) results[k] = std::move(warped);
    }
  }
  for (std::size_t k = 0; k < methods.size(); ++k) {
    out.report.timings.push_back({methods[k], best[k]});
    out.images.push_back(std::move(*results[k]));
  }
  return out;
}

}  // namespace facewarp

#endif  // FACEWARP_PIPELINE_HPP
