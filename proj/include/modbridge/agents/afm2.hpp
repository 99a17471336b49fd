#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modbridge/agents/miner.hpp"
#include "modbridge/agents/verifier.hpp"
#include "modbridge/paradigms/pipelines.hpp"

namespace mb {

// Everything the miner agent produced for one sample.
struct MiningStage {
  MiningRuleSet rules;
  std::map<ModalityKind, std::vector<QAPair>> qa;
  std::map<ModalityKind, std::string> summaries;
  std::vector<std::string> notes;
};

struct AgentEnv {
  PipelineEnv pipeline;
  // Shared across samples of a run; inferred per call when null.
  RuleCache* rules = nullptr;
  std::string dataset;
  std::string domain_description;
};

struct Afm2Result {
  Candidate final_candidate;
  RefinementTrace trace;
  // Absent when the miner agent is disabled.
  std::optional<MiningStage> mining;
};

// A sample that failed part-way. Carries the rounds completed so far.
class SampleFailure : public Error {
 public:
  SampleFailure(const Error& cause, RefinementTrace partial, std::optional<MiningStage> mining)
      : Error(cause.code(), std::string(cause.what()).substr(to_string(cause.code()).size() + 2)),
        partial_(std::move(partial)),
        mining_(std::move(mining)) {}

  const RefinementTrace& partial_trace() const noexcept { return partial_; }
  const std::optional<MiningStage>& mining() const noexcept { return mining_; }

 private:
  RefinementTrace partial_;
  std::optional<MiningStage> mining_;
};

// Mining, prompt synthesis, generation and verification with up to
// max_rounds refinement rounds. Round r (0-based) seeds its candidates at
// params.seed + r * candidate_count + ordinal. With the miner disabled the
// direct prompt is used as is; with the verifier disabled the first batch's
// embedding-ranked winner is accepted unverified.
Afm2Result run_afm2(const Sample& sample, ModalityKind target, const PipelineConfig& config,
                    const AgentEnv& env);

}  // namespace mb
