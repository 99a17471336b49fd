#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "modbridge/agents/afm2.hpp"
#include "modbridge/harness/config.hpp"
#include "modbridge/harness/manifest.hpp"
#include "modbridge/metrics/remote.hpp"

namespace mb {

inline constexpr int kResultsSchemaVersion = 1;

// Seconds since some fixed origin.
using Clock = std::function<double()>;
Clock steady_clock_seconds();
// Always 0: makes results files reproducible byte for byte.
Clock frozen_clock();

struct RunOptions {
  // Parent of the per-run directories.
  std::filesystem::path results_root = "results";
  Clock clock = steady_clock_seconds();
  // Used for fid/pesq; a mock or sidecar service is built from the config
  // when null.
  std::shared_ptr<MetricService> metrics;
  // Shared rule cache for afm2; one per call when null.
  RuleCache* rules = nullptr;
};

// "<pipeline id>-<kind>-m<rate%>-<config hash>", filesystem-safe.
std::string run_name(const ExperimentConfig& config);

// Runs the configured pipeline over every masked sample and appends one
// record per sample (in manifest order) to <run dir>/results.jsonl, then an
// aggregate record with corpus metrics. Final outputs go under
// <run dir>/blobs, per-sample traces under <run dir>/traces and the run
// summary to <run dir>/summary.json. Samples already recorded in the file
// are skipped. Per-sample failures become error records; only configuration
// problems throw (fatal_config_error). Returns the results file path.
std::filesystem::path run_experiment(const Manifest& manifest, const MissingMask& mask,
                                     const ExperimentConfig& config, const BackendSet& backends,
                                     const RunOptions& options);

}  // namespace mb
