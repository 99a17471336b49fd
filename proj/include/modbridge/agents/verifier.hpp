#pragma once

#include <map>
#include <string>
#include <vector>

#include "modbridge/backends/backend.hpp"

namespace mb {

// What the generation agent works from.
struct Guidance {
  // One paragraph per observed modality.
  std::map<ModalityKind, std::string> summaries;
  // Generation prompts for the target (candidate texts for a text target).
  std::vector<std::string> prompts;
  // 0 for the initial guidance, +1 per refinement.
  int revision = 0;

  // Summaries as "[kind] paragraph" lines.
  std::string text() const;
  // The summary for `kind`, or "not available".
  std::string info(ModalityKind kind) const;
};

inline constexpr std::size_t kImagePromptMinChars = 150;

// Lexical checks on synthesized prompts: image prompts need at least 150
// characters; audio prompts open with "the sound of" or a speaker phrase
// ("a man or a woman speak", "a man speak", "a woman speak"), any case.
bool prompt_allowed(ModalityKind target, std::string_view prompt);

// Renders the generation template for `target`, parses the candidate list and
// drops prompts failing prompt_allowed. If fewer than ceil(count/2) survive,
// asks once more; then insufficient_prompts. At most `count` are returned.
std::vector<std::string> synthesize_prompts(const Guidance& guidance, ModalityKind target, Backend& lm,
                                            int count, const TextParams& params, std::uint64_t seed,
                                            const BlobStore& store);

// overall - min(H * penalty, cap)
double penalized_score(double overall, std::uint32_t hallucinated, double penalty, double cap);
// Mean of per-reference penalized scores, clamped to [0, 5].
double combine_penalized(const std::vector<double>& per_reference);

struct ScoredCandidate {
  double score = 0.0;
  std::vector<JudgeReport> reports;
};

// Judges the candidate against each of one or two references.
ScoredCandidate score_candidate(const Candidate& candidate, const std::vector<ModalityPayload>& observed,
                                Backend& judge_backend, double penalty, double penalty_cap,
                                const TextParams& params, std::uint64_t seed, const BlobStore& store);

struct VerificationOutcome {
  std::vector<double> scores;
  std::vector<std::vector<JudgeReport>> reports;
  std::uint32_t best_index = 0;
  double best_score = 0.0;
  Decision decision = Decision::refine;
  // "<criterion>: <justification>" for every report, candidate order.
  std::vector<std::string> feedbacks;
  // The same, restricted to the best candidate.
  std::vector<std::string> best_feedbacks;
};

struct VerifierSettings {
  double threshold = 4.5;
  double penalty = 0.2;
  double penalty_cap = 1.0;
};

VerificationOutcome verify_batch(const std::vector<Candidate>& candidates,
                                 const std::vector<ModalityPayload>& observed, Backend& judge_backend,
                                 const VerifierSettings& settings, const TextParams& params,
                                 std::uint64_t seed, const BlobStore& store, int fan_out = 1);

// Rewrites `best` (a prompt, or the text itself for a text target) through
// the target's refinement template. The result replaces the guidance prompts
// and the revision goes up by one. One re-ask, then malformed_refinement.
Guidance refine_guidance(const Guidance& guidance, ModalityKind target, const std::string& best,
                         const std::vector<std::string>& feedbacks, Backend& lm, const TextParams& params,
                         std::uint64_t seed, const BlobStore& store);

}  // namespace mb
