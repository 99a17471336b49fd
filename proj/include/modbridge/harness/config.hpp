#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "modbridge/backends/descriptor.hpp"
#include "modbridge/core/json.hpp"

namespace mb {

// Which slice of a dataset one run covers.
struct ExperimentSettings {
  ModalityKind target_kind = ModalityKind::image;
  double missing_rate = 0.5;
  std::uint64_t mask_seed = 0;
  std::string domain_description = "general multimodal content";
  // Empty: compute fid/pesq with the built-in mock service.
  std::string metrics_endpoint;
  int parallel = 4;
};

// One config document: the pipeline fields at top level plus "backends" and
// "experiment".
struct ExperimentConfig {
  PipelineConfig pipeline;
  std::vector<BackendDescriptor> backends;
  ExperimentSettings experiment;

  // Hex prefix of the hash over everything that affects results.
  std::string hash() const;
};

json to_json(const ExperimentConfig& c);
// "variant" may also be given as a variant id or roster name. Throws
// fatal_config_error.
ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies "a.b.c=value". The value is parsed as JSON when it parses, else
// taken as a string. Throws fatal_config_error for malformed assignments.
void apply_override(json& doc, const std::string& assignment);

// Checks that every backend id the pipeline will call is present, with a
// role that can serve it. Throws fatal_config_error.
void check_routing(const ExperimentConfig& c);

}  // namespace mb
