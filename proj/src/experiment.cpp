#include "survtrack/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>

namespace survtrack {

SyntheticRun run_synthetic(const ScenarioSpec& spec, const Scene& scene, TrackerConfig config, AppearanceMode mode,
                           FingerprintProvider* provider, bool keep_results, bool concurrent) {
  config.geometry = spec.geometry;
  std::unique_ptr<HistogramEmbedder> owned;
  AppearanceSource appearance;
  if (mode == AppearanceMode::rendered) {
    if (!provider) {
      owned = std::make_unique<HistogramEmbedder>(HistogramEmbedderOptions{.dimension = config.fingerprint_dim});
      provider = owned.get();
    }
    appearance = AppearanceSource::from_patches([&spec](int frame) { return std::optional<Image>(render_frame(spec, frame)); },
                                                *provider);
  }
  SyntheticRun run;
  StreamOptions options;
  options.first_frame = 1;
  options.last_frame = spec.frames;
  options.concurrent = concurrent;
  run.summary = run_stream(
      scene.detections, appearance, config,
      [&](const FrameResult& r) {
        if (keep_results) run.results.push_back(r);
      },
      options);
  return run;
}

FrameMap<GroundTruthRecord> result_records(std::span<const FrameResult> results) {
  FrameMap<GroundTruthRecord> out;
  for (const FrameResult& r : results) {
    auto& frame = out[r.frame];
    for (const TrackReport& t : r.tracks) {
      GroundTruthRecord rec;
      rec.frame = r.frame;
      rec.id = t.id;
      rec.box = t.box;
      rec.consider = true;
      frame.push_back(rec);
    }
  }
  return out;
}

ScoreReport score(const Scene& scene, std::span<const FrameResult> results, double iou_threshold) {
  return evaluate(scene.ground_truth, result_records(results), iou_threshold);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("line fit needs distinct x values");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double max_segment_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("segment slopes need two or more points");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) best = std::max(best, (y[i] - y[i - 1]) / (x[i] - x[i - 1]));
  return best;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double ms(std::chrono::nanoseconds d) { return std::chrono::duration<double, std::milli>(d).count(); }

}  // namespace

std::string format_stage_breakdown(const RunSummary& s) {
  const std::pair<const char*, std::chrono::nanoseconds> stages[] = {
      {"ingest", s.stages.ingest}, {"embed", s.stages.embed},   {"associate", s.stages.associate},
      {"update", s.stages.update}, {"write", s.stages.write}};
  std::chrono::nanoseconds total{0};
  for (const auto& [name, t] : stages) total += t;
  std::string out;
  char line[128];
  for (const auto& [name, t] : stages) {
    const double share = total.count() > 0 ? 100.0 * static_cast<double>(t.count()) / static_cast<double>(total.count()) : 0.0;
    const double per_frame = s.frames ? ms(t) / static_cast<double>(s.frames) : 0.0;
    std::snprintf(line, sizeof line, "  %-10s %10.1f ms  %8.3f ms/frame  %5.1f%%\n", name, ms(t), per_frame, share);
    out += line;
  }
  return out;
}

std::string format_run_summary(const RunSummary& s) {
  char buf[640];
  std::snprintf(buf, sizeof buf,
                "frames            %llu\n"
                "detections        %llu (dropped: %llu below min confidence, %llu degenerate)\n"
                "tracks created    %llu\n"
                "tracks deleted    %llu\n"
                "embedder calls    %llu in %llu batches (%llu null fingerprints)\n"
                "kalman resets     %llu\n"
                "wall time         %.3f s\n"
                "throughput        %.1f frames/s\n",
                static_cast<unsigned long long>(s.frames), static_cast<unsigned long long>(s.detections),
                static_cast<unsigned long long>(s.dropped_low_confidence),
                static_cast<unsigned long long>(s.dropped_degenerate), static_cast<unsigned long long>(s.tracks_created),
                static_cast<unsigned long long>(s.tracks_deleted), static_cast<unsigned long long>(s.embedder_calls),
                static_cast<unsigned long long>(s.embedder_batches), static_cast<unsigned long long>(s.null_fingerprints),
                static_cast<unsigned long long>(s.kalman_resets), s.seconds(), s.frames_per_second());
  return buf;
}

}  // namespace survtrack
