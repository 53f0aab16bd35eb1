#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsl/config.hpp"
#include "tsl/io.hpp"
#include "tsl/sampler.hpp"

namespace tsl {

enum class RunMode { Track, Batch, Adaptive, Baseline };

struct ExperimentResult {
  DenseTensor reconstruction;  // image domain for k-space runs, data domain otherwise
  std::vector<MetricRow> metrics;
  std::vector<MaskRow> masks;
  std::vector<RunTraceRow> trace;
  std::vector<BudgetRow> budget;
  std::vector<double> frame_seconds;
  std::optional<TrackerState> final_state;
};

// Runs one protocol on a frame stream (last mode is time). The truth is only
// used for metrics; acquisition goes through `acquisition` when given, else
// through a provider over the (k-space or entry domain) data.
ExperimentResult run_experiment(ExperimentConfig const &config, RunMode mode, DenseTensor const &truth,
                                FrameProvider *acquisition = nullptr);

// Writes recon.cten, metrics.csv, masks.csv, trace.csv, budget.csv (adaptive
// runs) and manifest.json into `outputs`.
void write_artifacts(ExperimentConfig const &config, RunMode mode, ExperimentResult const &result,
                     std::filesystem::path const &outputs, std::filesystem::path const &input);

// Metrics of a reconstruction against the truth, frame by frame.
std::vector<MetricRow> frame_metrics(DenseTensor const &truth, DenseTensor const &estimate);

char const *mode_name(RunMode mode);
char const *build_commit();

} // namespace tsl
