#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modbridge/backends/registry.hpp"
#include "modbridge/core/types.hpp"

namespace mb {

enum class RankMethod { embedding, judge };
std::string_view to_string(RankMethod m);

struct RankedOutcome {
  std::uint32_t best_index = 0;
  std::vector<double> scores;
  RankMethod method = RankMethod::embedding;
};

// Index of the highest score, lowest index on ties. Throws empty_candidates.
std::uint32_t best_of(const std::vector<double>& scores);

// What a pipeline runs against: resolved backends, role routing and the blob
// store generated media go to.
struct PipelineEnv {
  const BackendSet& backends;
  const Routing& routing;
  BlobStore& store;
  // Concurrent backend calls per sample.
  int fan_out = 1;
};

// The generator backend for a variant: the backend registered under the
// variant's generator id if any, otherwise the routed generator for its kind.
Backend& generator_for(const VariantSpec& v, const PipelineEnv& env);

// Request given to a text generator together with the observed media. A
// non-empty hint is appended as extra guidance.
std::string text_request(std::string_view hint = {});
// Request sent to the captioner when only image or audio is observed.
std::string caption_request(ModalityKind source);

// Prompt (and, for text targets, attachments) for direct generation of
// `target`: observed text is the prompt as-is; otherwise the captioner turns
// the first observed medium into one. Throws no_usable_condition.
struct Conditioning {
  std::string prompt;
  std::vector<ModalityPayload> attachments;
};
Conditioning direct_conditioning(const Sample& sample, ModalityKind target, const PipelineEnv& env,
                                 const GenerationParams& params);

// `count` candidates of kind `target`, candidate j generated from
// prompts[j % prompts.size()] with seed base_seed + j and ordinal j. For
// text targets each prompt is sent with `attachments` to the text generator.
std::vector<Candidate> generate_candidates(Backend& generator, ModalityKind target,
                                           const std::vector<std::string>& prompts,
                                           const std::vector<ModalityPayload>& attachments,
                                           const GenerationParams& params, int count,
                                           std::uint64_t base_seed, BlobStore& store, int fan_out);

// Score = mean cosine similarity between the candidate's embedding and each
// observed payload's.
RankedOutcome rank_by_embedding(const std::vector<Candidate>& candidates,
                                const std::vector<ModalityPayload>& observed, Backend& embedder,
                                const BlobStore& store, int fan_out = 1);

// Score = (accuracy + relevance) / 2 from the ranking template, judged
// against each candidate's own generation prompt.
RankedOutcome rank_by_judge(const std::vector<Candidate>& candidates, Backend& judge_backend,
                            const TextParams& params, std::uint64_t seed, const BlobStore& store,
                            int fan_out = 1);

struct ParadigmResult {
  Candidate winner;
  std::vector<Candidate> candidates;
  // Absent for paradigm 1.
  std::optional<RankedOutcome> outcome;
  std::vector<std::string> mined_prompts;
};

Candidate run_paradigm1(const Sample& sample, ModalityKind target, Backend& generator,
                        const GenerationParams& params, const PipelineEnv& env);
ParadigmResult run_paradigm2(const Sample& sample, ModalityKind target, const VariantSpec& variant,
                             const GenerationParams& params, const PipelineEnv& env);
ParadigmResult run_paradigm3(const Sample& sample, ModalityKind target, const VariantSpec& variant,
                             const GenerationParams& params, Granularity granularity,
                             const PipelineEnv& env);

// Ranks with the variant's method (routed embedder or judge).
RankedOutcome rank_candidates(const std::vector<Candidate>& candidates, const Sample& sample,
                              Ranker ranker, const GenerationParams& params, const PipelineEnv& env);

}  // namespace mb
