#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "modbridge/core/json.hpp"
#include "modbridge/core/types.hpp"

namespace mb {

// Text after the first "[ANSWER]:" marker, trimmed, whitespace collapsed.
std::string parse_answer_line(std::string_view raw);

// First balanced {...} in `raw` that parses as a JSON object. Code fences and
// surrounding prose are skipped; trailing commas are tolerated.
json extract_json_object(std::string_view raw);

enum class CandidateField { text, prompts };

std::vector<std::string> parse_candidates_json(std::string_view raw, CandidateField field);

JudgeReport parse_judge_report(std::string_view raw, ModalityKind kind);

struct RankingScores {
  double accuracy = 0.0;
  double relevance = 0.0;
  double final_score() const { return (accuracy + relevance) / 2.0; }
};

// "Matching Accuracy: x" and "Semantic Relevance: y", each in [0,5].
RankingScores parse_ranking_scores(std::string_view raw);

// {"prompts": [...]} or the candidates list shape; empty strings dropped.
std::vector<std::string> parse_mined_prompts(std::string_view raw);

// Per-modality question lists. Accepts a bare `"image": [...], ...` fragment.
std::map<ModalityKind, std::vector<std::string>> parse_rules(std::string_view raw);

}  // namespace mb
