#pragma once

#include <span>
#include <string>
#include <vector>

#include "survtrack/metrics.hpp"
#include "survtrack/pipeline.hpp"
#include "survtrack/synth.hpp"

namespace survtrack {

enum class AppearanceMode { none, rendered };

struct SyntheticRun {
  RunSummary summary;
  std::vector<FrameResult> results;
};

/// Tracks a generated scene end to end. With `rendered`, frames are drawn on
/// demand and embedded by `provider` (a fresh HistogramEmbedder if null).
SyntheticRun run_synthetic(const ScenarioSpec& spec, const Scene& scene, TrackerConfig config, AppearanceMode mode,
                           FingerprintProvider* provider = nullptr, bool keep_results = true, bool concurrent = true);

/// Result records in the evaluation input format.
FrameMap<GroundTruthRecord> result_records(std::span<const FrameResult> results);

ScoreReport score(const Scene& scene, std::span<const FrameResult> results, double iou_threshold = 0.5);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);
/// Largest slope between consecutive points (x sorted ascending).
double max_segment_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

/// Multi-line per-stage wall times with shares of the total.
std::string format_stage_breakdown(const RunSummary& summary);
std::string format_run_summary(const RunSummary& summary);

}  // namespace survtrack
