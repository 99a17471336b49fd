#include "modbridge/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "modbridge/error.hpp"

namespace mb {

std::string_view to_string(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::image: return "image";
    case ModalityKind::text: return "text";
    case ModalityKind::audio: return "audio";
  }
  return "image";
}

ModalityKind parse_modality(std::string_view name) {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  fail(ErrorCode::schema_mismatch, "unknown modality '" + std::string(name) + "'");
}

ModalityPayload ModalityPayload::from_text(std::string text) {
  return ModalityPayload(ModalityKind::text, std::move(text));
}

ModalityPayload ModalityPayload::from_blob(ModalityKind kind, BlobRef ref) {
  if (kind == ModalityKind::text)
    fail(ErrorCode::invariant_violation, "text payloads carry inline text, not blobs");
  return ModalityPayload(kind, std::move(ref));
}

const std::string& ModalityPayload::text() const {
  if (const auto* s = std::get_if<std::string>(&content_)) return *s;
  fail(ErrorCode::precondition_failed, "payload is not text");
}

const BlobRef& ModalityPayload::blob() const {
  if (const auto* b = std::get_if<BlobRef>(&content_)) return *b;
  fail(ErrorCode::precondition_failed, "payload is not a blob");
}

const ModalityPayload* Sample::find(ModalityKind kind) const {
  auto it = payloads.find(kind);
  return it == payloads.end() ? nullptr : &it->second;
}

Sample Sample::without(ModalityKind kind) const {
  Sample copy = *this;
  copy.payloads.erase(kind);
  return copy;
}

std::vector<ModalityPayload> Sample::observed() const {
  std::vector<ModalityPayload> out;
  for (auto k : kAllKinds)
    if (const auto* p = find(k)) out.push_back(*p);
  return out;
}

bool MissingMask::contains(std::string_view id) const {
  return std::find(masked_ids.begin(), masked_ids.end(), id) != masked_ids.end();
}

std::string_view to_string(Ranker r) {
  switch (r) {
    case Ranker::none: return "none";
    case Ranker::embedding: return "embedding";
    case Ranker::judge: return "judge";
  }
  return "none";
}

std::string_view to_string(Miner m) {
  switch (m) {
    case Miner::none: return "none";
    case Miner::local_lmm: return "local_lmm";
    case Miner::strong_lmm: return "strong_lmm";
  }
  return "none";
}

Ranker parse_ranker(std::string_view s) {
  for (auto r : {Ranker::none, Ranker::embedding, Ranker::judge})
    if (to_string(r) == s) return r;
  fail(ErrorCode::schema_mismatch, "unknown ranker '" + std::string(s) + "'");
}

Miner parse_miner(std::string_view s) {
  for (auto m : {Miner::none, Miner::local_lmm, Miner::strong_lmm})
    if (to_string(m) == s) return m;
  fail(ErrorCode::schema_mismatch, "unknown miner '" + std::string(s) + "'");
}

std::string VariantSpec::id() const {
  return generator_id + "+" + std::string(to_string(ranker)) + "+" +
         std::string(to_string(miner));
}

void VariantSpec::validate(ModalityKind generator_output) const {
  if (generator_id.empty()) fail(ErrorCode::invariant_violation, "variant without generator");
  if (miner != Miner::none && ranker == Ranker::none)
    fail(ErrorCode::invariant_violation, "variant " + id() + ": a miner requires a ranker");
  if (generator_output != target_kind)
    fail(ErrorCode::invariant_violation,
         "variant " + id() + ": generator produces " + std::string(to_string(generator_output)) +
             ", target is " + std::string(to_string(target_kind)));
}

void GenerationParams::validate() const {
  if (candidate_count < 1) fail(ErrorCode::invalid_params, "candidate_count must be >= 1");
  if (image.steps < 1 || image.width < 1 || image.height < 1 || image.max_sequence_length < 1)
    fail(ErrorCode::invalid_params, "image steps/size must be positive");
  if (!(image.guidance_scale >= 0.0)) fail(ErrorCode::invalid_params, "guidance_scale must be >= 0");
  if (audio.steps < 1) fail(ErrorCode::invalid_params, "audio steps must be positive");
  if (!(audio.duration_seconds > 0.0)) fail(ErrorCode::invalid_params, "duration must be positive");
  if (audio.sample_rate_hz < 1) fail(ErrorCode::invalid_params, "sample rate must be positive");
  if (text.max_tokens < 1) fail(ErrorCode::invalid_params, "max_tokens must be positive");
  if (!(text.temperature >= 0.0) || !(text.top_p > 0.0 && text.top_p <= 1.0))
    fail(ErrorCode::invalid_params, "temperature/top_p out of range");
}

const std::array<std::string_view, 6>& criterion_names(ModalityKind kind) {
  static const std::array<std::string_view, 6> text = {
      "semantic_alignment", "factual_groundedness", "coherence_completeness",
      "consistency",        "relevance_focus",      "language_quality"};
  static const std::array<std::string_view, 6> image = {
      "accuracy_to_ground_truth", "factual_groundedness",  "creativity_originality",
      "visual_quality_realism",   "consistency_cohesion", "emotional_thematic_resonance"};
  static const std::array<std::string_view, 6> audio = {
      "semantic_alignment", "factual_groundedness", "noise_resilience",
      "intelligibility",    "audio_quality",        "relevance_focus"};
  switch (kind) {
    case ModalityKind::image: return image;
    case ModalityKind::audio: return audio;
    case ModalityKind::text: break;
  }
  return text;
}

int factual_groundedness_score(std::uint32_t hallucinated, std::uint32_t total) {
  if (hallucinated == 0) return 5;
  if (total == 0) return 0;
  const std::uint64_t h = hallucinated;
  const std::uint64_t n = total;
  const auto ceil_ratio = static_cast<std::int64_t>((5 * h + n - 1) / n);
  return static_cast<int>(std::max<std::int64_t>(0, 5 - ceil_ratio));
}

JudgeReport JudgeReport::make(ModalityKind kind, Criteria criteria, std::uint32_t hallucinated,
                              std::uint32_t total_assertions, std::uint32_t noise_segments,
                              std::map<std::string, std::string> justifications) {
  const auto& names = criterion_names(kind);
  if (criteria.size() != names.size())
    fail(ErrorCode::invariant_violation,
         "judge report needs exactly 6 criteria, got " + std::to_string(criteria.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (criteria[i].first != names[i])
      fail(ErrorCode::invariant_violation, "criterion " + std::to_string(i) + " should be '" +
                                               std::string(names[i]) + "', got '" +
                                               criteria[i].first + "'");
    const double v = criteria[i].second;
    if (!std::isfinite(v) || v < 0.0 || v > 5.0)
      fail(ErrorCode::invariant_violation, "criterion '" + criteria[i].first + "' outside [0,5]");
  }
  if (total_assertions > 0 && hallucinated > total_assertions)
    fail(ErrorCode::invariant_violation, "hallucinated count exceeds total assertions");
  if (kind != ModalityKind::audio && noise_segments != 0)
    fail(ErrorCode::invariant_violation, "noise segments are reported for audio only");

  JudgeReport r;
  r.kind_ = kind;
  double sum = 0.0;
  for (const auto& c : criteria) sum += c.second;
  r.overall_ = sum / static_cast<double>(criteria.size());
  r.criteria_ = std::move(criteria);
  r.hallucinated_ = hallucinated;
  r.total_ = total_assertions;
  r.noise_ = noise_segments;
  r.justifications_ = std::move(justifications);
  return r;
}

double JudgeReport::criterion(std::string_view name) const {
  for (const auto& c : criteria_)
    if (c.first == name) return c.second;
  fail(ErrorCode::precondition_failed, "no criterion '" + std::string(name) + "'");
}

std::string_view to_string(Paradigm p) {
  switch (p) {
    case Paradigm::p1: return "p1";
    case Paradigm::p2: return "p2";
    case Paradigm::p3: return "p3";
    case Paradigm::afm2: return "afm2";
  }
  return "p1";
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::baseline: return "baseline";
    case Granularity::object: return "object";
    case Granularity::object_location: return "object_location";
    case Granularity::object_color: return "object_color";
  }
  return "baseline";
}

Paradigm parse_paradigm(std::string_view s) {
  for (auto p : {Paradigm::p1, Paradigm::p2, Paradigm::p3, Paradigm::afm2})
    if (to_string(p) == s) return p;
  fail(ErrorCode::schema_mismatch, "unknown paradigm '" + std::string(s) + "'");
}

Granularity parse_granularity(std::string_view s) {
  for (auto g : {Granularity::baseline, Granularity::object, Granularity::object_location,
                 Granularity::object_color})
    if (to_string(g) == s) return g;
  fail(ErrorCode::schema_mismatch, "unknown granularity '" + std::string(s) + "'");
}

const std::string& Routing::generator_for(ModalityKind kind) const {
  switch (kind) {
    case ModalityKind::image: return image_gen;
    case ModalityKind::audio: return audio_gen;
    case ModalityKind::text: break;
  }
  return text_gen;
}

void PipelineConfig::validate() const {
  params.validate();
  if (!(threshold >= 0.0 && threshold <= 5.0))
    fail(ErrorCode::invariant_violation, "threshold must lie in [0,5]");
  if (!(penalty >= 0.0)) fail(ErrorCode::invariant_violation, "penalty must be >= 0");
  if (!(penalty_cap > 0.0 && penalty_cap <= 5.0))
    fail(ErrorCode::invariant_violation, "penalty_cap must lie in (0,5]");
  if (max_rounds < 1) fail(ErrorCode::invariant_violation, "max_rounds must be >= 1");
  if (fan_out < 1) fail(ErrorCode::invariant_violation, "fan_out must be >= 1");
  if (paradigm == Paradigm::afm2) return;
  if (!variant) fail(ErrorCode::invariant_violation, "paradigm needs a variant");
  const auto& v = *variant;
  const bool ok = (paradigm == Paradigm::p1 && v.ranker == Ranker::none && v.miner == Miner::none) ||
                  (paradigm == Paradigm::p2 && v.ranker != Ranker::none && v.miner == Miner::none) ||
                  (paradigm == Paradigm::p3 && v.ranker != Ranker::none && v.miner != Miner::none);
  if (!ok)
    fail(ErrorCode::invariant_violation,
         "variant " + v.id() + " does not belong to paradigm " + std::string(to_string(paradigm)));
}

std::string PipelineConfig::pipeline_id() const {
  if (paradigm != Paradigm::afm2) return variant ? variant->id() : std::string(to_string(paradigm));
  std::string id = "afm2";
  if (!enable_miner) id += "-no-miner";
  if (!enable_verifier) id += "-no-verifier";
  return id;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::accept: return "accept";
    case Decision::refine: return "refine";
    case Decision::force_accept: return "force_accept";
  }
  return "refine";
}

Decision parse_decision(std::string_view s) {
  for (auto d : {Decision::accept, Decision::refine, Decision::force_accept})
    if (to_string(d) == s) return d;
  fail(ErrorCode::schema_mismatch, "unknown decision '" + std::string(s) + "'");
}

void RefinementTrace::validate(double threshold, int max_rounds) const {
  const auto bad = [](const std::string& why) { fail(ErrorCode::invariant_violation, why); };
  if (rounds.empty()) bad("trace has no rounds");
  if (static_cast<int>(rounds.size()) > max_rounds) bad("trace exceeds the round budget");
  for (std::size_t i = 0; i + 1 < rounds.size(); ++i)
    if (rounds[i].decision != Decision::refine) bad("only the last round may terminate");
  const auto& last = rounds.back();
  if (last.decision == Decision::refine) bad("last round must accept or force-accept");
  if (!final_candidate) bad("trace has no final candidate");
  if (last.decision == Decision::accept) {
    if (verified && last.best_score < threshold) bad("accepted below threshold");
    if (!verified && rounds.size() != 1) bad("unverified traces have exactly one round");
    if (last.best_index >= last.candidates.size() ||
        !(last.candidates[last.best_index] == *final_candidate))
      bad("accepted candidate is not the round's best");
    return;
  }
  std::size_t best_round = 0;
  for (std::size_t i = 1; i < rounds.size(); ++i)
    if (rounds[i].best_score > rounds[best_round].best_score) best_round = i;
  const auto& r = rounds[best_round];
  if (r.best_index >= r.candidates.size() || !(r.candidates[r.best_index] == *final_candidate))
    bad("force-accepted candidate is not the global best");
}

}  // namespace mb
