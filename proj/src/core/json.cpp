#include "modbridge/core/json.hpp"

#include <algorithm>

#include "modbridge/error.hpp"

namespace mb {

void schema_error(std::string_view type_name, std::string_view what) {
  fail(ErrorCode::schema_mismatch, std::string(type_name) + ": " + std::string(what));
}

void check_fields(const json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view type_name) {
  if (!j.is_object()) schema_error(type_name, "expected a JSON object");
  for (const auto& item : j.items()) {
    const auto& key = item.key();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      schema_error(type_name, "unknown field '" + key + "'");
  }
}

namespace {

template <typename T>
std::vector<T> list_of(const json& j, std::string_view key, std::string_view type_name) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(type_name, "missing field '" + std::string(key) + "'");
  if (!it->is_array()) schema_error(type_name, "field '" + std::string(key) + "' must be a list");
  std::vector<T> out;
  for (const auto& e : *it) {
    if constexpr (std::is_same_v<T, std::string> || std::is_arithmetic_v<T>) {
      try {
        out.push_back(e.get<T>());
      } catch (const json::exception& ex) {
        schema_error(type_name, "field '" + std::string(key) + "': " + ex.what());
      }
    } else {
      out.push_back(from_json<T>(e));
    }
  }
  return out;
}

ModalityKind kind_field(const json& j, std::string_view key, std::string_view type_name) {
  return parse_modality(field<std::string>(j, key, type_name));
}

}  // namespace

json to_json(ModalityKind k) { return std::string(to_string(k)); }

json to_json(const BlobRef& b) {
  return {{"path", b.path}, {"media_type", b.media_type}, {"byte_length", b.byte_length}};
}

template <>
BlobRef from_json<BlobRef>(const json& j) {
  constexpr std::string_view T = "BlobRef";
  check_fields(j, {"path", "media_type", "byte_length"}, T);
  return BlobRef{field<std::string>(j, "path", T), field<std::string>(j, "media_type", T),
                 field<std::uint64_t>(j, "byte_length", T)};
}

json to_json(const ModalityPayload& p) {
  json j = {{"kind", to_json(p.kind())}};
  if (p.is_text())
    j["text"] = p.text();
  else
    j["blob"] = to_json(p.blob());
  return j;
}

template <>
ModalityPayload from_json<ModalityPayload>(const json& j) {
  constexpr std::string_view T = "ModalityPayload";
  check_fields(j, {"kind", "text", "blob"}, T);
  const auto kind = kind_field(j, "kind", T);
  const bool has_text = j.contains("text");
  const bool has_blob = j.contains("blob");
  if (kind == ModalityKind::text) {
    if (!has_text || has_blob) schema_error(T, "text payloads carry 'text' and no 'blob'");
    return ModalityPayload::from_text(field<std::string>(j, "text", T));
  }
  if (!has_blob || has_text) schema_error(T, "image/audio payloads carry 'blob' and no 'text'");
  return ModalityPayload::from_blob(kind, from_json<BlobRef>(j.at("blob")));
}

json to_json(const Sample& s) {
  json payloads = json::object();
  for (const auto& [k, p] : s.payloads) payloads[std::string(to_string(k))] = to_json(p);
  json j = {{"id", s.id}, {"payloads", payloads}};
  j["labels"] = s.labels ? json(*s.labels) : json(nullptr);
  return j;
}

template <>
Sample from_json<Sample>(const json& j) {
  constexpr std::string_view T = "Sample";
  check_fields(j, {"id", "payloads", "labels"}, T);
  Sample s;
  s.id = field<std::string>(j, "id", T);
  const auto& payloads = j.contains("payloads") ? j.at("payloads") : json();
  if (!payloads.is_object()) schema_error(T, "'payloads' must be an object");
  for (const auto& item : payloads.items()) {
    const auto kind = parse_modality(item.key());
    auto payload = from_json<ModalityPayload>(item.value());
    if (payload.kind() != kind) schema_error(T, "payload kind disagrees with its key");
    s.payloads.emplace(kind, std::move(payload));
  }
  if (j.contains("labels") && !j.at("labels").is_null())
    s.labels = list_of<std::string>(j, "labels", T);
  return s;
}

json to_json(const MissingMask& m) {
  return {{"target_kind", to_json(m.target_kind)},
          {"rate", m.rate},
          {"seed", m.seed},
          {"eligible_count", m.eligible_count},
          {"masked_ids", m.masked_ids}};
}

template <>
MissingMask from_json<MissingMask>(const json& j) {
  constexpr std::string_view T = "MissingMask";
  check_fields(j, {"target_kind", "rate", "seed", "eligible_count", "masked_ids"}, T);
  MissingMask m;
  m.target_kind = kind_field(j, "target_kind", T);
  m.rate = field<double>(j, "rate", T);
  m.seed = field<std::uint64_t>(j, "seed", T);
  m.eligible_count = field<std::uint64_t>(j, "eligible_count", T);
  m.masked_ids = list_of<std::string>(j, "masked_ids", T);
  if (!(m.rate >= 0.0 && m.rate <= 1.0)) schema_error(T, "rate outside [0,1]");
  return m;
}

json to_json(const VariantSpec& v) {
  return {{"generator_id", v.generator_id},
          {"ranker", std::string(to_string(v.ranker))},
          {"miner", std::string(to_string(v.miner))},
          {"target_kind", to_json(v.target_kind)}};
}

template <>
VariantSpec from_json<VariantSpec>(const json& j) {
  constexpr std::string_view T = "VariantSpec";
  check_fields(j, {"generator_id", "ranker", "miner", "target_kind"}, T);
  VariantSpec v;
  v.generator_id = field<std::string>(j, "generator_id", T);
  v.ranker = parse_ranker(field<std::string>(j, "ranker", T));
  v.miner = parse_miner(field<std::string>(j, "miner", T));
  v.target_kind = kind_field(j, "target_kind", T);
  return v;
}

json to_json(const GenerationParams& p) {
  return {{"candidate_count", p.candidate_count},
          {"seed", p.seed},
          {"image",
           {{"steps", p.image.steps},
            {"guidance_scale", p.image.guidance_scale},
            {"max_sequence_length", p.image.max_sequence_length},
            {"width", p.image.width},
            {"height", p.image.height}}},
          {"audio",
           {{"steps", p.audio.steps},
            {"duration_seconds", p.audio.duration_seconds},
            {"sample_rate_hz", p.audio.sample_rate_hz}}},
          {"text",
           {{"max_tokens", p.text.max_tokens},
            {"temperature", p.text.temperature},
            {"top_p", p.text.top_p},
            {"presence_penalty", p.text.presence_penalty}}}};
}

// Missing keys keep their defaults so config files can stay short.
template <>
GenerationParams from_json<GenerationParams>(const json& j) {
  constexpr std::string_view T = "GenerationParams";
  check_fields(j, {"candidate_count", "seed", "image", "audio", "text"}, T);
  GenerationParams p;
  p.candidate_count = field_or<int>(j, "candidate_count", p.candidate_count, T);
  p.seed = field_or<std::uint64_t>(j, "seed", p.seed, T);
  if (j.contains("image")) {
    const auto& i = j.at("image");
    constexpr std::string_view I = "GenerationParams.image";
    check_fields(i, {"steps", "guidance_scale", "max_sequence_length", "width", "height"}, I);
    p.image.steps = field_or<int>(i, "steps", p.image.steps, I);
    p.image.guidance_scale = field_or<double>(i, "guidance_scale", p.image.guidance_scale, I);
    p.image.max_sequence_length =
        field_or<int>(i, "max_sequence_length", p.image.max_sequence_length, I);
    p.image.width = field_or<int>(i, "width", p.image.width, I);
    p.image.height = field_or<int>(i, "height", p.image.height, I);
  }
  if (j.contains("audio")) {
    const auto& a = j.at("audio");
    constexpr std::string_view A = "GenerationParams.audio";
    check_fields(a, {"steps", "duration_seconds", "sample_rate_hz"}, A);
    p.audio.steps = field_or<int>(a, "steps", p.audio.steps, A);
    p.audio.duration_seconds = field_or<double>(a, "duration_seconds", p.audio.duration_seconds, A);
    p.audio.sample_rate_hz = field_or<int>(a, "sample_rate_hz", p.audio.sample_rate_hz, A);
  }
  if (j.contains("text")) {
    const auto& t = j.at("text");
    constexpr std::string_view X = "GenerationParams.text";
    check_fields(t, {"max_tokens", "temperature", "top_p", "presence_penalty"}, X);
    p.text.max_tokens = field_or<int>(t, "max_tokens", p.text.max_tokens, X);
    p.text.temperature = field_or<double>(t, "temperature", p.text.temperature, X);
    p.text.top_p = field_or<double>(t, "top_p", p.text.top_p, X);
    p.text.presence_penalty = field_or<double>(t, "presence_penalty", p.text.presence_penalty, X);
  }
  return p;
}

json to_json(const Candidate& c) {
  return {{"payload", to_json(c.payload)},
          {"generation_prompt", c.generation_prompt},
          {"generator_id", c.generator_id},
          {"ordinal", c.ordinal},
          {"seed_used", c.seed_used}};
}

template <>
Candidate from_json<Candidate>(const json& j) {
  constexpr std::string_view T = "Candidate";
  check_fields(j, {"payload", "generation_prompt", "generator_id", "ordinal", "seed_used"}, T);
  if (!j.contains("payload")) schema_error(T, "missing field 'payload'");
  return Candidate{from_json<ModalityPayload>(j.at("payload")),
                   field<std::string>(j, "generation_prompt", T),
                   field<std::string>(j, "generator_id", T), field<std::uint32_t>(j, "ordinal", T),
                   field<std::uint64_t>(j, "seed_used", T)};
}

json to_json(const JudgeReport& r) {
  json criteria = json::array();
  for (const auto& [name, score] : r.criteria()) criteria.push_back({{"name", name}, {"score", score}});
  return {{"kind", to_json(r.kind())},
          {"criteria", criteria},
          {"overall_score", r.overall_score()},
          {"hallucinated_count", r.hallucinated()},
          {"total_assertions", r.total_assertions()},
          {"noise_segments", r.noise_segments()},
          {"justifications", r.justifications()}};
}

template <>
JudgeReport from_json<JudgeReport>(const json& j) {
  constexpr std::string_view T = "JudgeReport";
  check_fields(j,
               {"kind", "criteria", "overall_score", "hallucinated_count", "total_assertions",
                "noise_segments", "justifications"},
               T);
  if (!j.contains("criteria") || !j.at("criteria").is_array())
    schema_error(T, "'criteria' must be a list");
  JudgeReport::Criteria criteria;
  for (const auto& c : j.at("criteria")) {
    check_fields(c, {"name", "score"}, "JudgeReport.criteria");
    criteria.emplace_back(field<std::string>(c, "name", T), field<double>(c, "score", T));
  }
  std::map<std::string, std::string> just;
  if (j.contains("justifications")) {
    try {
      just = j.at("justifications").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
      schema_error(T, e.what());
    }
  }
  // overall_score is derived; the stored copy is ignored on input.
  return JudgeReport::make(kind_field(j, "kind", T), std::move(criteria),
                           field<std::uint32_t>(j, "hallucinated_count", T),
                           field<std::uint32_t>(j, "total_assertions", T),
                           field_or<std::uint32_t>(j, "noise_segments", 0, T), std::move(just));
}

json to_json(const Routing& r) {
  return {{"image_gen", r.image_gen},       {"text_gen", r.text_gen},
          {"audio_gen", r.audio_gen},       {"embedder", r.embedder},
          {"judge", r.judge},               {"captioner", r.captioner},
          {"local_miner", r.local_miner},   {"strong_miner", r.strong_miner},
          {"reasoner", r.reasoner},         {"miner", r.miner},
          {"summarizer", r.summarizer}};
}

template <>
Routing from_json<Routing>(const json& j) {
  constexpr std::string_view T = "Routing";
  check_fields(j,
               {"image_gen", "text_gen", "audio_gen", "embedder", "judge", "captioner",
                "local_miner", "strong_miner", "reasoner", "miner", "summarizer"},
               T);
  Routing r;
  r.image_gen = field_or<std::string>(j, "image_gen", "", T);
  r.text_gen = field_or<std::string>(j, "text_gen", "", T);
  r.audio_gen = field_or<std::string>(j, "audio_gen", "", T);
  r.embedder = field_or<std::string>(j, "embedder", "", T);
  r.judge = field_or<std::string>(j, "judge", "", T);
  r.captioner = field_or<std::string>(j, "captioner", "", T);
  r.local_miner = field_or<std::string>(j, "local_miner", "", T);
  r.strong_miner = field_or<std::string>(j, "strong_miner", "", T);
  r.reasoner = field_or<std::string>(j, "reasoner", "", T);
  r.miner = field_or<std::string>(j, "miner", "", T);
  r.summarizer = field_or<std::string>(j, "summarizer", "", T);
  return r;
}

json to_json(const PipelineConfig& c) {
  return {{"paradigm", std::string(to_string(c.paradigm))},
          {"variant", c.variant ? to_json(*c.variant) : json(nullptr)},
          {"routing", to_json(c.routing)},
          {"params", to_json(c.params)},
          {"granularity", std::string(to_string(c.granularity))},
          {"agents",
           {{"threshold", c.threshold},
            {"penalty", c.penalty},
            {"penalty_cap", c.penalty_cap},
            {"max_rounds", c.max_rounds},
            {"enable_miner", c.enable_miner},
            {"enable_verifier", c.enable_verifier},
            {"fan_out", c.fan_out}}}};
}

template <>
PipelineConfig from_json<PipelineConfig>(const json& j) {
  constexpr std::string_view T = "PipelineConfig";
  check_fields(j, {"paradigm", "variant", "routing", "params", "granularity", "agents"}, T);
  PipelineConfig c;
  c.paradigm = parse_paradigm(field<std::string>(j, "paradigm", T));
  if (j.contains("variant") && !j.at("variant").is_null())
    c.variant = from_json<VariantSpec>(j.at("variant"));
  if (j.contains("routing")) c.routing = from_json<Routing>(j.at("routing"));
  if (j.contains("params")) c.params = from_json<GenerationParams>(j.at("params"));
  c.granularity = parse_granularity(field_or<std::string>(j, "granularity", "baseline", T));
  if (j.contains("agents")) {
    const auto& a = j.at("agents");
    constexpr std::string_view A = "PipelineConfig.agents";
    check_fields(a,
                 {"threshold", "penalty", "penalty_cap", "max_rounds", "enable_miner",
                  "enable_verifier", "fan_out"},
                 A);
    c.threshold = field_or<double>(a, "threshold", c.threshold, A);
    c.penalty = field_or<double>(a, "penalty", c.penalty, A);
    c.penalty_cap = field_or<double>(a, "penalty_cap", c.penalty_cap, A);
    c.max_rounds = field_or<int>(a, "max_rounds", c.max_rounds, A);
    c.enable_miner = field_or<bool>(a, "enable_miner", c.enable_miner, A);
    c.enable_verifier = field_or<bool>(a, "enable_verifier", c.enable_verifier, A);
    c.fan_out = field_or<int>(a, "fan_out", c.fan_out, A);
  }
  return c;
}

json to_json(const RoundRecord& r) {
  json candidates = json::array();
  for (const auto& c : r.candidates) candidates.push_back(to_json(c));
  return {{"round_index", r.round_index},
          {"guidance_text", r.guidance_text},
          {"prompts", r.prompts},
          {"candidates", candidates},
          {"candidate_scores", r.candidate_scores},
          {"best_index", r.best_index},
          {"best_score", r.best_score},
          {"feedbacks", r.feedbacks},
          {"decision", std::string(to_string(r.decision))}};
}

template <>
RoundRecord from_json<RoundRecord>(const json& j) {
  constexpr std::string_view T = "RoundRecord";
  check_fields(j,
               {"round_index", "guidance_text", "prompts", "candidates", "candidate_scores",
                "best_index", "best_score", "feedbacks", "decision"},
               T);
  RoundRecord r;
  r.round_index = field<int>(j, "round_index", T);
  r.guidance_text = field<std::string>(j, "guidance_text", T);
  r.prompts = list_of<std::string>(j, "prompts", T);
  r.candidates = list_of<Candidate>(j, "candidates", T);
  r.candidate_scores = list_of<double>(j, "candidate_scores", T);
  r.best_index = field<std::uint32_t>(j, "best_index", T);
  r.best_score = field<double>(j, "best_score", T);
  r.feedbacks = list_of<std::string>(j, "feedbacks", T);
  r.decision = parse_decision(field<std::string>(j, "decision", T));
  return r;
}

json to_json(const RefinementTrace& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds) rounds.push_back(to_json(r));
  return {{"rounds", rounds},
          {"final_candidate", t.final_candidate ? to_json(*t.final_candidate) : json(nullptr)},
          {"verified", t.verified}};
}

template <>
RefinementTrace from_json<RefinementTrace>(const json& j) {
  constexpr std::string_view T = "RefinementTrace";
  check_fields(j, {"rounds", "final_candidate", "verified"}, T);
  RefinementTrace t;
  t.rounds = list_of<RoundRecord>(j, "rounds", T);
  if (j.contains("final_candidate") && !j.at("final_candidate").is_null())
    t.final_candidate = from_json<Candidate>(j.at("final_candidate"));
  t.verified = field_or<bool>(j, "verified", true, T);
  return t;
}

}  // namespace mb
