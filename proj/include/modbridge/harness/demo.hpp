#pragma once

#include <filesystem>
#include <vector>

#include "modbridge/harness/aggregate.hpp"
#include "modbridge/harness/config.hpp"
#include "modbridge/harness/experiment.hpp"

namespace mb {

// Writes a small tri-modal dataset (caption, solid-colour PNG, tone WAV per
// sample) and its manifest "toy.jsonl" under dir. Deterministic. Returns the
// manifest path.
std::filesystem::path make_toy_dataset(const std::filesystem::path& dir, std::size_t count = 20);

// Mock backends for every role, named after the baseline roster, and the
// routing that uses them.
std::vector<BackendDescriptor> mock_backends();
Routing mock_routing();

// A config for the mock stack. Media sizes are reduced so the demo runs fast.
ExperimentConfig mock_config(Paradigm paradigm, ModalityKind target, double rate, std::uint64_t seed);

struct DemoOptions {
  std::filesystem::path root = "results/mock-demo";
  std::uint64_t seed = 7;
  std::vector<double> rates = {0.3, 0.5, 0.7};
  std::vector<ModalityKind> kinds = {ModalityKind::image, ModalityKind::text, ModalityKind::audio};
  int parallel = 1;
  Clock clock = frozen_clock();
};

struct DemoReport {
  std::vector<std::filesystem::path> results;
  AggregateTable table;
};

// Toy data under root/toy, then p1, p2, p3 and afm2 (plus the two agent
// ablations) for every kind and rate, results under root/runs.
DemoReport run_mock_demo(const DemoOptions& options);

}  // namespace mb
