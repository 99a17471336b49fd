#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mb {

enum class ModalityKind { image, text, audio };

inline constexpr std::array<ModalityKind, 3> kAllKinds = {
    ModalityKind::image, ModalityKind::text, ModalityKind::audio};

std::string_view to_string(ModalityKind kind);
ModalityKind parse_modality(std::string_view name);

// Reference to a file under a declared root. The path is relative and never
// contains parent components.
struct BlobRef {
  std::string path;
  std::string media_type;
  std::uint64_t byte_length = 0;

  bool operator==(const BlobRef&) const = default;
};

// Text payloads carry the string inline; image and audio payloads point at a
// blob. The factories enforce that pairing.
class ModalityPayload {
 public:
  static ModalityPayload from_text(std::string text);
  static ModalityPayload from_blob(ModalityKind kind, BlobRef ref);

  ModalityKind kind() const noexcept { return kind_; }
  bool is_text() const noexcept { return kind_ == ModalityKind::text; }
  const std::string& text() const;
  const BlobRef& blob() const;

  bool operator==(const ModalityPayload&) const = default;

 private:
  ModalityPayload(ModalityKind kind, std::variant<std::string, BlobRef> content)
      : kind_(kind), content_(std::move(content)) {}

  ModalityKind kind_;
  std::variant<std::string, BlobRef> content_;
};

struct Sample {
  std::string id;
  std::map<ModalityKind, ModalityPayload> payloads;
  std::optional<std::vector<std::string>> labels;

  bool has(ModalityKind kind) const { return payloads.count(kind) != 0; }
  const ModalityPayload* find(ModalityKind kind) const;
  // Copy of this sample with `kind` removed.
  Sample without(ModalityKind kind) const;
  // Observed payloads in canonical kind order (image, text, audio).
  std::vector<ModalityPayload> observed() const;

  bool operator==(const Sample&) const = default;
};

struct MissingMask {
  ModalityKind target_kind = ModalityKind::image;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::size_t eligible_count = 0;
  // Manifest order.
  std::vector<std::string> masked_ids;

  bool contains(std::string_view id) const;
  bool operator==(const MissingMask&) const = default;
};

enum class Ranker { none, embedding, judge };
enum class Miner { none, local_lmm, strong_lmm };

std::string_view to_string(Ranker r);
std::string_view to_string(Miner m);
Ranker parse_ranker(std::string_view s);
Miner parse_miner(std::string_view s);

struct VariantSpec {
  std::string generator_id;
  Ranker ranker = Ranker::none;
  Miner miner = Miner::none;
  ModalityKind target_kind = ModalityKind::image;

  // "<generator>+<ranker>+<miner>"
  std::string id() const;
  // Throws invariant_violation when miner is set without a ranker or the
  // generator's output modality disagrees with target_kind.
  void validate(ModalityKind generator_output) const;

  bool operator==(const VariantSpec&) const = default;
};

struct ImageParams {
  int steps = 50;
  double guidance_scale = 4.5;
  int max_sequence_length = 512;
  int width = 512;
  int height = 512;
  bool operator==(const ImageParams&) const = default;
};

struct AudioParams {
  int steps = 100;
  double duration_seconds = 10.0;
  int sample_rate_hz = 16000;
  bool operator==(const AudioParams&) const = default;
};

struct TextParams {
  int max_tokens = 1024;
  double temperature = 0.3;
  double top_p = 0.8;
  double presence_penalty = 1.5;
  bool operator==(const TextParams&) const = default;
};

struct GenerationParams {
  int candidate_count = 5;
  ImageParams image;
  AudioParams audio;
  TextParams text;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const GenerationParams&) const = default;
};

struct Candidate {
  ModalityPayload payload;
  std::string generation_prompt;
  std::string generator_id;
  std::uint32_t ordinal = 0;
  std::uint64_t seed_used = 0;

  bool operator==(const Candidate&) const = default;
};

// The six criterion names of the verification template for `kind`, in the
// template's order.
const std::array<std::string_view, 6>& criterion_names(ModalityKind kind);

// Integer factual-groundedness rubric: 5 when nothing is hallucinated,
// otherwise max(0, 5 - ceil(5H/N)).
int factual_groundedness_score(std::uint32_t hallucinated, std::uint32_t total);

class JudgeReport {
 public:
  using Criteria = std::vector<std::pair<std::string, double>>;

  // Validates names against the modality template, scores in [0,5] and H <= N
  // (when N > 0). The overall score is always recomputed locally.
  static JudgeReport make(ModalityKind kind, Criteria criteria,
                          std::uint32_t hallucinated, std::uint32_t total_assertions,
                          std::uint32_t noise_segments = 0,
                          std::map<std::string, std::string> justifications = {});

  ModalityKind kind() const noexcept { return kind_; }
  const Criteria& criteria() const noexcept { return criteria_; }
  double criterion(std::string_view name) const;
  double overall_score() const noexcept { return overall_; }
  std::uint32_t hallucinated() const noexcept { return hallucinated_; }
  std::uint32_t total_assertions() const noexcept { return total_; }
  std::uint32_t noise_segments() const noexcept { return noise_; }
  const std::map<std::string, std::string>& justifications() const noexcept {
    return justifications_;
  }

  bool operator==(const JudgeReport&) const = default;

 private:
  JudgeReport() = default;

  ModalityKind kind_ = ModalityKind::text;
  Criteria criteria_;
  double overall_ = 0.0;
  std::uint32_t hallucinated_ = 0;
  std::uint32_t total_ = 0;
  std::uint32_t noise_ = 0;
  std::map<std::string, std::string> justifications_;
};

enum class Paradigm { p1, p2, p3, afm2 };
enum class Granularity { baseline, object, object_location, object_color };

std::string_view to_string(Paradigm p);
std::string_view to_string(Granularity g);
Paradigm parse_paradigm(std::string_view s);
Granularity parse_granularity(std::string_view s);

// Backend ids used by each role of the pipelines.
struct Routing {
  std::string image_gen;
  std::string text_gen;
  std::string audio_gen;
  std::string embedder;
  std::string judge;
  std::string captioner;
  std::string local_miner;
  std::string strong_miner;
  // Agentic pipeline.
  std::string reasoner;
  std::string miner;
  std::string summarizer;

  const std::string& generator_for(ModalityKind kind) const;
  bool operator==(const Routing&) const = default;
};

struct PipelineConfig {
  Paradigm paradigm = Paradigm::afm2;
  std::optional<VariantSpec> variant;
  Routing routing;
  GenerationParams params;
  double threshold = 4.5;
  double penalty = 0.2;
  double penalty_cap = 1.0;
  int max_rounds = 5;
  Granularity granularity = Granularity::baseline;
  bool enable_miner = true;
  bool enable_verifier = true;
  // Upper bound on concurrent backend calls issued by one sample.
  int fan_out = 4;

  void validate() const;
  // Variant id for p1..p3, "afm2[...]" for the agentic pipeline.
  std::string pipeline_id() const;
  bool operator==(const PipelineConfig&) const = default;
};

enum class Decision { accept, refine, force_accept };
std::string_view to_string(Decision d);
Decision parse_decision(std::string_view s);

struct RoundRecord {
  int round_index = 1;
  std::string guidance_text;
  std::vector<std::string> prompts;
  std::vector<Candidate> candidates;
  std::vector<double> candidate_scores;
  std::uint32_t best_index = 0;
  double best_score = 0.0;
  std::vector<std::string> feedbacks;
  Decision decision = Decision::refine;

  bool operator==(const RoundRecord&) const = default;
};

struct RefinementTrace {
  std::vector<RoundRecord> rounds;
  std::optional<Candidate> final_candidate;
  // False when the verifier is disabled: round scores are embedding
  // similarities and the single round accepts unconditionally.
  bool verified = true;

  // Checks the round/decision state machine against threshold and the round
  // budget. Throws invariant_violation.
  void validate(double threshold, int max_rounds) const;
  bool operator==(const RefinementTrace&) const = default;
};

}  // namespace mb
