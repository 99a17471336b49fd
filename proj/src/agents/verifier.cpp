#include "modbridge/agents/verifier.hpp"

#include <algorithm>
#include <cmath>

#include "modbridge/error.hpp"
#include "modbridge/prompts/parse.hpp"
#include "modbridge/util/parallel.hpp"
#include "modbridge/util/text.hpp"

namespace mb {

std::string Guidance::text() const {
  std::string out;
  for (const auto& [kind, summary] : summaries) {
    if (!out.empty()) out += "\n";
    out += "[" + std::string(to_string(kind)) + "] " + summary;
  }
  return out;
}

std::string Guidance::info(ModalityKind kind) const {
  auto it = summaries.find(kind);
  return it == summaries.end() || it->second.empty() ? std::string(kNotAvailable) : it->second;
}

bool prompt_allowed(ModalityKind target, std::string_view prompt) {
  const std::string p = trim(prompt);
  switch (target) {
    case ModalityKind::image: return p.size() >= kImagePromptMinChars;
    case ModalityKind::audio:
      for (std::string_view opening : {"the sound of", "a man or a woman speak", "a man speak", "a woman speak"})
        if (starts_with_ci(p, opening)) return true;
      return false;
    case ModalityKind::text: return !p.empty();
  }
  return false;
}

namespace {

std::string template_suffix(ModalityKind k) { return std::string(to_string(k)); }

Bindings generation_bindings(const Guidance& g, ModalityKind target, int count) {
  Bindings b{{"candidate_count", std::to_string(count)}};
  for (ModalityKind k : kAllKinds)
    if (k != target) b[std::string(to_string(k)) + "_info"] = g.info(k);
  return b;
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '*' && s.back() == '*')))
    s = trim(s.substr(1, s.size() - 2));
  return s;
}

std::string parse_refined(ModalityKind target, const std::string& raw) {
  std::string out;
  if (target == ModalityKind::image) {
    const std::string lower = to_lower(raw);
    const auto pos = lower.find("refined prompt:");
    if (pos == std::string::npos) fail(ErrorCode::marker_not_found, "no 'Refined Prompt:' label");
    out = raw.substr(pos + std::string_view("refined prompt:").size());
    if (auto end = out.find("\n\n"); end != std::string::npos) out.resize(end);
  } else {
    out = raw;
  }
  out = strip_quotes(collapse_whitespace(out));
  if (out.empty()) fail(ErrorCode::schema_mismatch, "empty refinement");
  return out;
}

}  // namespace

std::vector<std::string> synthesize_prompts(const Guidance& guidance, ModalityKind target, Backend& lm,
                                            int count, const TextParams& params, std::uint64_t seed,
                                            const BlobStore& store) {
  require(!guidance.summaries.empty(), "synthesize_prompts needs at least one summary");
  require(count >= 1, "synthesize_prompts needs count >= 1");
  const std::size_t needed = static_cast<std::size_t>((count + 1) / 2);
  const std::string prompt =
      render("gen-" + template_suffix(target), generation_bindings(guidance, target, count));
  const CandidateField field = target == ModalityKind::text ? CandidateField::text : CandidateField::prompts;
  std::string last;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string p = attempt == 0 ? prompt
                                       : prompt + "\n\nReturn " + std::to_string(count) +
                                             " candidates in the JSON format above and follow every rule.";
    const std::string raw = lm.complete_text(p, {}, params, seed, store);
    std::vector<std::string> parsed;
    try {
      parsed = parse_candidates_json(raw, field);
    } catch (const Error& e) {
      if (!is_format_error(e)) throw;
      last = e.what();
      continue;
    }
    std::vector<std::string> kept;
    for (auto& c : parsed)
      if (prompt_allowed(target, c) && std::find(kept.begin(), kept.end(), c) == kept.end())
        kept.push_back(std::move(c));
    if (kept.size() >= needed) {
      if (kept.size() > static_cast<std::size_t>(count)) kept.resize(static_cast<std::size_t>(count));
      return kept;
    }
    last = std::to_string(kept.size()) + " of " + std::to_string(parsed.size()) + " prompts usable, " +
           std::to_string(needed) + " needed";
  }
  fail(ErrorCode::insufficient_prompts, lm.id() + ": " + last);
}

double penalized_score(double overall, std::uint32_t hallucinated, double penalty, double cap) {
  return overall - std::min(static_cast<double>(hallucinated) * penalty, cap);
}

double combine_penalized(const std::vector<double>& per_reference) {
  require(!per_reference.empty(), "combine_penalized needs at least one score");
  double sum = 0.0;
  for (double s : per_reference) sum += s;
  return std::clamp(sum / static_cast<double>(per_reference.size()), 0.0, 5.0);
}

ScoredCandidate score_candidate(const Candidate& candidate, const std::vector<ModalityPayload>& observed,
                                Backend& judge_backend, double penalty, double penalty_cap,
                                const TextParams& params, std::uint64_t seed, const BlobStore& store) {
  require(!observed.empty() && observed.size() <= 2, "score_candidate needs one or two references");
  const ModalityKind kind = candidate.payload.kind();
  const std::string tid = "verify-" + template_suffix(kind);
  ScoredCandidate out;
  std::vector<double> per_ref;
  for (const auto& ref : observed) {
    Bindings b{{"ground_truth_modality", std::string(to_string(ref.kind()))}};
    if (kind == ModalityKind::text)
      b["generated_text"] = candidate.payload.text();
    else
      b["generated_prompt"] = candidate.generation_prompt;
    auto report = judge(judge_backend, candidate.payload, {ref}, tid, b, params, seed, store);
    per_ref.push_back(penalized_score(report.overall_score(), report.hallucinated(), penalty, penalty_cap));
    out.reports.push_back(std::move(report));
  }
  out.score = combine_penalized(per_ref);
  return out;
}

VerificationOutcome verify_batch(const std::vector<Candidate>& candidates,
                                 const std::vector<ModalityPayload>& observed, Backend& judge_backend,
                                 const VerifierSettings& settings, const TextParams& params,
                                 std::uint64_t seed, const BlobStore& store, int fan_out) {
  if (candidates.empty()) fail(ErrorCode::empty_candidates, "verify_batch");
  std::vector<ScoredCandidate> scored(candidates.size());
  parallel_for(candidates.size(), fan_out, [&](std::size_t i) {
    scored[i] = score_candidate(candidates[i], observed, judge_backend, settings.penalty, settings.penalty_cap,
                                params, seed, store);
  });
  VerificationOutcome out;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    out.scores.push_back(scored[i].score);
    out.reports.push_back(std::move(scored[i].reports));
  }
  for (std::uint32_t i = 1; i < out.scores.size(); ++i)
    if (out.scores[i] > out.scores[out.best_index]) out.best_index = i;
  out.best_score = out.scores[out.best_index];
  out.decision = out.best_score >= settings.threshold ? Decision::accept : Decision::refine;
  for (std::size_t i = 0; i < out.reports.size(); ++i)
    for (const auto& report : out.reports[i])
      for (const auto& [name, text] : report.justifications()) {
        out.feedbacks.push_back(name + ": " + text);
        if (i == out.best_index) out.best_feedbacks.push_back(name + ": " + text);
      }
  return out;
}

Guidance refine_guidance(const Guidance& guidance, ModalityKind target, const std::string& best,
                         const std::vector<std::string>& feedbacks, Backend& lm, const TextParams& params,
                         std::uint64_t seed, const BlobStore& store) {
  std::string feedback;
  for (const auto& f : feedbacks) feedback += (feedback.empty() ? "" : "\n") + f;
  if (feedback.empty()) feedback = "No specific issues were reported.";
  Bindings b{{"feedback", feedback}};
  switch (target) {
    case ModalityKind::image: b["original_prompt"] = best; break;
    case ModalityKind::audio:
      b["original_audio_prompt"] = best;
      b["text_info"] = guidance.info(ModalityKind::text);
      b["image_info"] = guidance.info(ModalityKind::image);
      break;
    case ModalityKind::text:
      b["original_prompt"] = best;
      b["image_info"] = guidance.info(ModalityKind::image);
      b["audio_info"] = guidance.info(ModalityKind::audio);
      break;
  }
  const std::string prompt = render("refine-" + template_suffix(target), b);
  const char* reminder = target == ModalityKind::image ? "Begin the answer with the label Refined Prompt:"
                                                       : "Return only the refined result.";
  Guidance out = guidance;
  out.prompts = {ask_parsed(lm, prompt, {}, params, seed, store, 1, reminder, ErrorCode::malformed_refinement,
                            [target](const std::string& raw) { return parse_refined(target, raw); })};
  ++out.revision;
  return out;
}

}  // namespace mb
