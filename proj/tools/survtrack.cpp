// survtrack: track, evaluate, generate and benchmark MOT-format sequences.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survtrack/config.hpp"
#include "survtrack/experiment.hpp"
#include "survtrack/fingerprint.hpp"
#include "survtrack/metrics.hpp"
#include "survtrack/mot_io.hpp"
#include "survtrack/pipeline.hpp"
#include "survtrack/synth.hpp"

namespace fs = std::filesystem;
using namespace survtrack;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kDataError = 4,
  kUndefinedScore = 5,
};

class CliError : public std::runtime_error {
 public:
  CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
  const char* env = std::getenv("SURVTRACK_LOG");
  if (!env) return LogLevel::info;
  const std::string v = env;
  if (v == "quiet" || v == "0" || v == "error") return LogLevel::quiet;
  if (v == "debug" || v == "2") return LogLevel::debug;
  return LogLevel::info;
}

bool info_enabled() { return log_level() != LogLevel::quiet; }
bool debug_enabled() { return log_level() == LogLevel::debug; }

struct TrackerFlags {
  std::string config;
  std::optional<std::string> alpha, beta, gate, timeout, buffer, min_conf;

  void add_to(CLI::App& app) {
    app.add_option("--config", config, "Tracker config file (key = value, [section] per module)");
    app.add_option("--alpha", alpha, "Weight of the center-distance cost")->type_name("FLOAT");
    app.add_option("--beta", beta, "Weight of the fingerprint cost")->type_name("FLOAT");
    app.add_option("--gate", gate, "Assignments with cost above this are dropped")->type_name("FLOAT");
    app.add_option("--timeout", timeout, "Frames without update before a track is deleted")->type_name("INT");
    app.add_option("--buffer", buffer, "Frames per embedding batch")->type_name("INT");
    app.add_option("--min-conf", min_conf, "Detections below this confidence are ignored")->type_name("FLOAT");
  }

  ResolvedConfig resolve() const {
    std::optional<IniDocument> doc;
    if (!config.empty()) {
      if (!fs::is_regular_file(config)) throw CliError(kIoError, "config file not found: " + config);
      try {
        doc = IniDocument::read(config);
      } catch (const IniError& e) {
        throw CliError(kConfigError, e.what());
      }
    }
    ResolvedConfig cfg = resolve_config(doc ? &*doc : nullptr);
    const std::pair<const char*, const std::optional<std::string>*> flags[] = {
        {"association.alpha", &alpha},     {"association.beta", &beta}, {"association.gate", &gate},
        {"tracker.timeout", &timeout},     {"tracker.buffer", &buffer}, {"tracker.min_confidence", &min_conf}};
    for (const auto& [key, value] : flags) {
      if (*value) cfg.set(key, **value, ConfigOrigin::flag);
    }
    return cfg;
  }
};

void use_sequence_geometry(ResolvedConfig& cfg, int width, int height) {
  if (width <= 0 || height <= 0) return;
  if (cfg.origin_of("image.width") == ConfigOrigin::builtin) {
    cfg.set("image.width", std::to_string(width), ConfigOrigin::sequence);
  }
  if (cfg.origin_of("image.height") == ConfigOrigin::builtin) {
    cfg.set("image.height", std::to_string(height), ConfigOrigin::sequence);
  }
}

std::string probe_image_extension(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string ext = f.extension().string();
    if (ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".ppm") return ext;
  }
  return ".jpg";
}

void print_header(const std::string& title) {
  if (info_enabled()) std::printf("== %s ==\n", title.c_str());
}

// ---------------------------------------------------------------- track

struct TrackOptions {
  std::string sequence, detections, images, fingerprints, output;
  bool no_appearance = false;
  bool sequential = false;
  TrackerFlags flags;
};

int cmd_track(const TrackOptions& o) {
  if (o.sequence.empty() && o.detections.empty()) {
    throw CliError(kConfigError, "track needs --sequence or --detections");
  }
  ResolvedConfig cfg = o.flags.resolve();

  fs::path seq_dir = o.sequence;
  SequenceInfo info;
  bool have_info = false;
  if (!seq_dir.empty()) {
    if (!fs::is_directory(seq_dir)) throw CliError(kIoError, "sequence directory not found: " + seq_dir.string());
    if (fs::is_regular_file(seq_dir / "seqinfo.ini")) {
      info = read_sequence_info(seq_dir / "seqinfo.ini");
      have_info = true;
      use_sequence_geometry(cfg, info.width, info.height);
    }
  }
  const fs::path det_path = o.detections.empty() ? seq_dir / "det" / "det.txt" : fs::path(o.detections);
  if (!fs::is_regular_file(det_path)) throw CliError(kIoError, "detection file not found: " + det_path.string());
  if (o.output.empty()) throw CliError(kConfigError, "track needs --output");
  cfg.tracker.validate();

  const auto detections = read_detections(det_path);

  // appearance: sidecar > frame images > geometry only
  std::optional<FingerprintSidecar> sidecar;
  HistogramEmbedder embedder(HistogramEmbedderOptions{.dimension = cfg.tracker.fingerprint_dim});
  AppearanceSource appearance;
  std::string appearance_note = "none (geometry only)";
  fs::path image_base;
  SequenceInfo image_info = info;
  if (!o.no_appearance) {
    if (!o.fingerprints.empty()) {
      if (!fs::is_regular_file(o.fingerprints)) throw CliError(kIoError, "fingerprint file not found: " + o.fingerprints);
      sidecar = FingerprintSidecar::read(o.fingerprints);
      appearance = AppearanceSource::from_sidecar(*sidecar);
      appearance_note = "sidecar " + o.fingerprints;
    } else {
      fs::path dir;
      if (!o.images.empty()) {
        dir = o.images;
        if (!fs::is_directory(dir)) throw CliError(kIoError, "image directory not found: " + dir.string());
      } else if (!seq_dir.empty() && fs::is_directory(seq_dir / info.image_dir)) {
        dir = seq_dir / info.image_dir;
      }
      if (!dir.empty()) {
        image_info.image_dir = fs::absolute(dir).string();
        if (!have_info || !o.images.empty()) image_info.image_ext = probe_image_extension(dir);
        appearance = AppearanceSource::from_patches(
            [&image_base, &image_info](int frame) { return load_frame_image(image_base, image_info, frame); },
            embedder);
        appearance_note = "histogram embedder on " + dir.string() + "/*" + image_info.image_ext;
      }
    }
  }

  StreamOptions stream;
  stream.first_frame = 1;
  if (have_info && info.length > 0) stream.last_frame = info.length;
  stream.concurrent = !o.sequential;

  const fs::path out_path = o.output;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw CliError(kIoError, "cannot write results: " + out_path.string());
  const bool debug = debug_enabled();
  const RunSummary summary = run_stream(
      detections, appearance, cfg.tracker,
      [&](const FrameResult& r) {
        for (const TrackReport& t : r.tracks) out << format_result_line(r.frame, t.id, t.box) << '\n';
        if (debug) std::fprintf(stderr, "frame %d: %zu tracks reported\n", r.frame, r.tracks.size());
      },
      stream);
  out.close();
  if (!out) throw CliError(kIoError, "failed writing results: " + out_path.string());

  if (info_enabled()) {
    print_header("track");
    std::printf("detections        %s\n", det_path.string().c_str());
    std::printf("appearance        %s\n", appearance_note.c_str());
    std::printf("output            %s\n", out_path.string().c_str());
    std::printf("%s", format_run_summary(summary).c_str());
    std::printf("stages\n%s", format_stage_breakdown(summary).c_str());
    std::printf("config (default < file < sequence < flag)\n%s", cfg.audit().c_str());
  }
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string sequence, gt, results, name;
  double iou = 0.5;
};

int cmd_evaluate(const EvaluateOptions& o) {
  fs::path gt_path = o.gt;
  if (gt_path.empty()) {
    if (o.sequence.empty()) throw CliError(kConfigError, "evaluate needs --gt or --sequence");
    gt_path = fs::path(o.sequence) / "gt" / "gt.txt";
  }
  if (o.results.empty()) throw CliError(kConfigError, "evaluate needs --results");
  if (!(o.iou > 0.0 && o.iou <= 1.0)) throw CliError(kConfigError, "--iou must lie in (0, 1]");
  for (const fs::path& p : {gt_path, fs::path(o.results)}) {
    if (!fs::is_regular_file(p)) throw CliError(kIoError, "file not found: " + p.string());
  }
  const auto gt = read_ground_truth(gt_path);
  const auto hyp = read_ground_truth(o.results);
  const ScoreReport report = evaluate(gt, hyp, o.iou);
  const std::string name = o.name.empty() ? (o.sequence.empty() ? gt_path.stem().string()
                                                                 : fs::path(o.sequence).filename().string())
                                          : o.name;
  std::printf("%s", format_report_table(report, name).c_str());
  std::printf("%s\n%s\n", summary_header().c_str(), format_summary_line(report, name).c_str());
  if (!report.defined) {
    std::fprintf(stderr, "survtrack: scores undefined, ground truth has no considered boxes\n");
    return kUndefinedScore;
  }
  return kOk;
}

// ---------------------------------------------------------------- generate

struct SceneOptions {
  std::string spec;
  std::string scenario = "lanes";
  int targets = 10;
  int frames = 300;
  int density = 50;
  int hidden = 10;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App& app) {
    app.add_option("--spec", spec, "Scenario file ([scene] and [target <id>] sections)");
    app.add_option("--scenario", scenario, "Built-in scenario when no --spec is given")
        ->check(CLI::IsMember({"lanes", "crossing", "occlusion", "crowd"}));
    app.add_option("--targets", targets, "lanes: number of targets")->check(CLI::PositiveNumber);
    app.add_option("--frames", frames, "lanes, occlusion, crowd: sequence length")->check(CLI::PositiveNumber);
    app.add_option("--density", density, "crowd: targets alive per frame")->check(CLI::PositiveNumber);
    app.add_option("--hidden", hidden, "occlusion: frames the target is hidden")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "Random seed (overrides the scenario's)");
  }

  ScenarioSpec build() const {
    ScenarioSpec out;
    if (!spec.empty()) {
      if (!fs::is_regular_file(spec)) throw CliError(kIoError, "scenario file not found: " + spec);
      out = read_scenario(spec);
    } else if (scenario == "lanes") {
      out = lanes_scenario(targets, frames, seed.value_or(1));
    } else if (scenario == "crossing") {
      out = crossing_scenario();
    } else if (scenario == "occlusion") {
      out = occlusion_scenario(hidden, frames);
    } else {
      out = crowd_scenario(density, frames, seed.value_or(1));
    }
    if (seed) out.seed = *seed;
    out.validate();
    return out;
  }
};

int cmd_generate(const SceneOptions& s, const std::string& output, bool images) {
  if (output.empty()) throw CliError(kConfigError, "generate needs --output");
  const ScenarioSpec spec = s.build();
  const Scene scene = generate(spec);
  write_scene(output, spec, scene, images);
  if (info_enabled()) {
    std::size_t gt = 0, det = 0;
    for (const auto& [f, v] : scene.ground_truth) gt += v.size();
    for (const auto& [f, v] : scene.detections) det += v.size();
    print_header("generate");
    std::printf("scene             %s (seed %llu)\n", spec.name.c_str(), static_cast<unsigned long long>(spec.seed));
    std::printf("frames            %d at %gx%g\n", spec.frames, spec.geometry.width, spec.geometry.height);
    std::printf("targets           %zu\n", spec.targets.size());
    std::printf("ground truth      %zu records\n", gt);
    std::printf("detections        %zu records\n", det);
    std::printf("images            %s\n", images ? "written" : "skipped");
    std::printf("output            %s\n", output.c_str());
  }
  return kOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkOptions {
  SceneOptions scene;
  std::string output;
  int repetitions = 3;
  std::vector<int> sweep{25, 50, 100, 200};
  int sweep_frames = 150;
  bool no_sweep = false;
  bool sequential = false;
  double require_fps = 0.0;
  TrackerFlags flags;
};

int cmd_benchmark(const BenchmarkOptions& o) {
  ResolvedConfig cfg = o.flags.resolve();
  const ScenarioSpec spec = o.scene.build();
  use_sequence_geometry(cfg, static_cast<int>(spec.geometry.width), static_cast<int>(spec.geometry.height));
  cfg.tracker.validate();
  const Scene scene = generate(spec);

  print_header("benchmark");
  std::size_t det = 0;
  for (const auto& [f, v] : scene.detections) det += v.size();
  std::printf("scene             %s, %d frames at %gx%g, %.1f detections/frame\n", spec.name.c_str(), spec.frames,
              spec.geometry.width, spec.geometry.height, static_cast<double>(det) / spec.frames);
  std::printf("embedder          histogram, dimension %d, buffer %d frames, %s\n", cfg.tracker.fingerprint_dim,
              cfg.tracker.buffer, o.sequential ? "sequential" : "embedding ahead of tracking");

  std::vector<double> fps;
  std::optional<SyntheticRun> best;
  for (int rep = 0; rep < o.repetitions; ++rep) {
    SyntheticRun run = run_synthetic(spec, scene, cfg.tracker, AppearanceMode::rendered, nullptr,
                                     !o.output.empty() && rep == 0, !o.sequential);
    std::printf("run %d             %.3f s, %.1f frames/s, %.0f detections/s\n", rep + 1, run.summary.seconds(),
                run.summary.frames_per_second(),
                run.summary.seconds() > 0 ? static_cast<double>(run.summary.detections) / run.summary.seconds() : 0.0);
    fps.push_back(run.summary.frames_per_second());
    if (rep == 0 && !o.output.empty()) write_results(o.output, run.results);
    if (!best || run.summary.wall < best->summary.wall) {
      run.results.clear();
      best = std::move(run);
    }
  }
  const double fps_min = *std::min_element(fps.begin(), fps.end());
  const double fps_median = median(fps);
  std::printf("frames/s          min %.1f, median %.1f over %d runs\n", fps_min, fps_median, o.repetitions);
  std::printf("fastest run\n%s", format_run_summary(best->summary).c_str());
  std::printf("stages (fastest run)\n%s", format_stage_breakdown(best->summary).c_str());

  if (!o.no_sweep && o.sweep.size() >= 2) {
    std::printf("scaling sweep     %d frames per point, embedding stage only\n", o.sweep_frames);
    std::printf("  %8s %12s %12s %12s %14s\n", "det/frm", "detections", "embed calls", "embed ms", "us/detection");
    std::vector<double> x, y;
    for (int density : o.sweep) {
      const ScenarioSpec s = crowd_scenario(density, o.sweep_frames, spec.seed, spec.geometry);
      const Scene sc = generate(s);
      double embed_best = 0.0;
      RunSummary summary;
      for (int rep = 0; rep < std::max(1, o.repetitions); ++rep) {
        const SyntheticRun run = run_synthetic(s, sc, cfg.tracker, AppearanceMode::rendered, nullptr, false, false);
        const double embed_ms = std::chrono::duration<double, std::milli>(run.summary.stages.embed).count();
        if (rep == 0 || embed_ms < embed_best) {
          embed_best = embed_ms;
          summary = run.summary;
        }
      }
      x.push_back(static_cast<double>(summary.detections));
      y.push_back(embed_best);
      std::printf("  %8d %12llu %12llu %12.1f %14.2f\n", density, static_cast<unsigned long long>(summary.detections),
                  static_cast<unsigned long long>(summary.embedder_calls), embed_best,
                  summary.detections ? 1000.0 * embed_best / static_cast<double>(summary.detections) : 0.0);
    }
    const LineFit fit = least_squares(x, y);
    const double seg = max_segment_slope(x, y);
    std::printf("  linear fit slope %.4f ms/detection, steepest segment %.4f (ratio %.2f)\n", fit.slope, seg,
                fit.slope > 0 ? seg / fit.slope : 0.0);
  }
  std::printf("config (default < file < sequence < flag)\n%s", cfg.audit().c_str());
  if (o.require_fps > 0.0 && fps_median < o.require_fps) {
    std::fprintf(stderr, "survtrack: median throughput %.1f frames/s below required %.1f\n", fps_median, o.require_fps);
    return kFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-object tracker for MOT-format detection streams"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 failure, 2 config, 3 I/O, 4 data, 5 undefined score.\n"
             "SURVTRACK_LOG=quiet|info|debug sets log verbosity.");

  TrackOptions track;
  auto* t = app.add_subcommand("track", "Track a detection file and write MOT results");
  t->add_option("--sequence", track.sequence, "Sequence directory with seqinfo.ini, det/det.txt, img1/");
  t->add_option("--detections", track.detections, "Detection file (overrides the sequence's det/det.txt)");
  t->add_option("--images", track.images, "Directory of frame images named <frame:06d>.<ext>");
  t->add_option("--fingerprints", track.fingerprints, "Precomputed fingerprint sidecar file");
  t->add_option("--output", track.output, "Result file to write")->required();
  t->add_flag("--no-appearance", track.no_appearance, "Ignore images and sidecars; geometry-only costs");
  t->add_flag("--sequential", track.sequential, "Embed and track on one thread");
  track.flags.add_to(*t);

  EvaluateOptions eval;
  auto* e = app.add_subcommand("evaluate", "Score a result file against ground truth");
  e->add_option("--sequence", eval.sequence, "Sequence directory (uses gt/gt.txt)");
  e->add_option("--gt", eval.gt, "Ground-truth file");
  e->add_option("--results", eval.results, "Result file")->required();
  e->add_option("--iou", eval.iou, "IoU threshold for a match");
  e->add_option("--name", eval.name, "Sequence name in the report");

  SceneOptions gen;
  std::string gen_output;
  bool no_images = false;
  auto* g = app.add_subcommand("generate", "Write a synthetic sequence directory");
  gen.add_to(*g);
  g->add_option("--output", gen_output, "Sequence directory to create")->required();
  g->add_flag("--no-images", no_images, "Skip rendering frame images");

  BenchmarkOptions bench;
  bench.scene.scenario = "crowd";
  bench.scene.frames = 4479;
  auto* b = app.add_subcommand("benchmark", "Time the pipeline on a synthetic scene");
  bench.scene.add_to(*b);
  bench.flags.add_to(*b);
  b->add_option("--repetitions", bench.repetitions, "Timed runs of the full scene")->check(CLI::PositiveNumber);
  b->add_option("--sweep", bench.sweep, "Detections/frame for the embedding scaling sweep")->delimiter(',');
  b->add_option("--sweep-frames", bench.sweep_frames, "Frames per sweep point")->check(CLI::PositiveNumber);
  b->add_flag("--no-sweep", bench.no_sweep, "Skip the scaling sweep");
  b->add_flag("--sequential", bench.sequential, "Embed and track on one thread");
  b->add_option("--output", bench.output, "Write the first run's results here");
  b->add_option("--require-fps", bench.require_fps, "Exit 1 if median frames/s falls below this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kConfigError;
  }

  try {
    if (*t) return cmd_track(track);
    if (*e) return cmd_evaluate(eval);
    if (*g) return cmd_generate(gen, gen_output, !no_images);
    if (*b) return cmd_benchmark(bench);
  } catch (const CliError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return err.code();
  } catch (const MotParseError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kDataError;
  } catch (const FingerprintError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kDataError;
  } catch (const TrackerError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kDataError;
  } catch (const MotIoError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kIoError;
  } catch (const ImageError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kIoError;
  } catch (const IniError& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kConfigError;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "survtrack: invalid configuration: %s\n", err.what());
    return kConfigError;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "survtrack: %s\n", err.what());
    return kFailure;
  }
  return kFailure;
}
