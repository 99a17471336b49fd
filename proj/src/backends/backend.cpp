#include "modbridge/backends/backend.hpp"

#include "modbridge/error.hpp"
#include "modbridge/prompts/parse.hpp"

namespace mb {

namespace {

class Permit {
 public:
  explicit Permit(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~Permit() { s_.release(); }
  Permit(const Permit&) = delete;
  Permit& operator=(const Permit&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

void require_role(const BackendDescriptor& d, std::initializer_list<Role> roles, const char* op) {
  for (auto r : roles)
    if (d.role == r) return;
  fail(ErrorCode::precondition_failed, d.backend_id + " has role " + std::string(to_string(d.role)) +
                                           ", which cannot serve " + op);
}

}  // namespace

Backend::Backend(BackendDescriptor descriptor)
    : descriptor_(std::move(descriptor)), permits_(descriptor_.permits) {
  descriptor_.validate();
}

std::string Backend::complete_text(const std::string& prompt,
                                   const std::vector<ModalityPayload>& attachments,
                                   const TextParams& params, std::uint64_t seed,
                                   const BlobStore& store) {
  require_role(descriptor_, {Role::miner, Role::reasoner, Role::judge, Role::text_gen},
               "complete_text");
  for (const auto& a : attachments)
    if (!descriptor_.accepts(a.kind()))
      fail(ErrorCode::unsupported_attachment,
           id() + " does not accept " + std::string(to_string(a.kind())) + " attachments");
  Permit permit(permits_);
  return do_complete_text(prompt, attachments, params, seed, store);
}

std::vector<Candidate> Backend::generate_image(const std::string& prompt, const ImageParams& params,
                                               int count, std::uint64_t base_seed, BlobStore& store) {
  require_role(descriptor_, {Role::image_gen}, "generate_image");
  if (count < 1) fail(ErrorCode::invalid_params, "candidate count must be >= 1");
  if (params.steps < 1 || params.width < 1 || params.height < 1 || params.max_sequence_length < 1 ||
      !(params.guidance_scale >= 0.0))
    fail(ErrorCode::invalid_params, "image parameters out of range");
  std::vector<Media> media;
  {
    Permit permit(permits_);
    media = do_generate_image(prompt, params, count, base_seed);
  }
  return wrap(ModalityKind::image, prompt, std::move(media), count, base_seed, store);
}

std::vector<Candidate> Backend::generate_audio(const std::string& prompt, const AudioParams& params,
                                               int count, std::uint64_t base_seed, BlobStore& store) {
  require_role(descriptor_, {Role::audio_gen}, "generate_audio");
  if (count < 1) fail(ErrorCode::invalid_params, "candidate count must be >= 1");
  if (params.steps < 1 || !(params.duration_seconds > 0.0) || params.sample_rate_hz < 1)
    fail(ErrorCode::invalid_params, "audio parameters out of range");
  std::vector<Media> media;
  {
    Permit permit(permits_);
    media = do_generate_audio(prompt, params, count, base_seed);
  }
  return wrap(ModalityKind::audio, prompt, std::move(media), count, base_seed, store);
}

EmbeddingVector Backend::embed(const ModalityPayload& payload, const BlobStore& store) {
  require_role(descriptor_, {Role::embedder}, "embed");
  std::vector<double> values;
  {
    Permit permit(permits_);
    values = do_embed(payload, store);
  }
  if (values.size() != static_cast<std::size_t>(descriptor_.embedding_dim))
    fail(ErrorCode::transport_error, id() + ": protocol error, embedding has dimension " +
                                         std::to_string(values.size()) + ", expected " +
                                         std::to_string(descriptor_.embedding_dim));
  try {
    return EmbeddingVector::normalized(std::move(values));
  } catch (const Error& e) {
    fail(ErrorCode::transport_error, id() + ": protocol error, " + e.what());
  }
}

std::vector<Backend::Media> Backend::do_generate_image(const std::string&, const ImageParams&, int,
                                                       std::uint64_t) {
  fail(ErrorCode::unsupported_operation, id() + " cannot generate images");
}

std::vector<Backend::Media> Backend::do_generate_audio(const std::string&, const AudioParams&, int,
                                                       std::uint64_t) {
  fail(ErrorCode::unsupported_operation, id() + " cannot generate audio");
}

std::vector<double> Backend::do_embed(const ModalityPayload&, const BlobStore&) {
  fail(ErrorCode::unsupported_operation, id() + " cannot embed");
}

std::vector<Candidate> Backend::wrap(ModalityKind kind, const std::string& prompt,
                                     std::vector<Media> media, int count, std::uint64_t base_seed,
                                     BlobStore& store) {
  if (media.size() != static_cast<std::size_t>(count))
    fail(ErrorCode::transport_error, id() + ": protocol error, asked for " + std::to_string(count) +
                                         " outputs, got " + std::to_string(media.size()));
  std::vector<Candidate> out;
  out.reserve(media.size());
  for (std::size_t i = 0; i < media.size(); ++i) {
    BlobRef ref = store.put(std::move(media[i].bytes), media[i].media_type);
    out.push_back(Candidate{ModalityPayload::from_blob(kind, std::move(ref)), prompt, id(),
                            static_cast<std::uint32_t>(i), base_seed + i});
  }
  return out;
}

bool is_format_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::no_json_found:
    case ErrorCode::schema_mismatch:
    case ErrorCode::invariant_violation:
    case ErrorCode::marker_not_found:
      return true;
    default:
      return false;
  }
}

JudgeReport judge(Backend& backend, const ModalityPayload& candidate,
                  const std::vector<ModalityPayload>& references, std::string_view template_id,
                  const Bindings& bindings, const TextParams& params, std::uint64_t seed,
                  const BlobStore& store) {
  require(backend.descriptor().role == Role::judge, backend.id() + " is not a judge");
  require(!references.empty(), "judge needs at least one reference");
  const std::string prompt = render(template_id, bindings);
  std::vector<ModalityPayload> attachments;
  attachments.reserve(references.size() + 1);
  attachments.push_back(candidate);
  attachments.insert(attachments.end(), references.begin(), references.end());
  return ask_parsed(backend, prompt, attachments, params, seed, store, kJudgeReasks,
                    "Reminder: reply with only the JSON object in the exact format above.",
                    ErrorCode::malformed_judgment,
                    [&](const std::string& raw) { return parse_judge_report(raw, candidate.kind()); });
}

std::vector<Candidate> generate_text(Backend& backend, const std::string& prompt,
                                     const std::vector<ModalityPayload>& attachments,
                                     const TextParams& params, int count, std::uint64_t base_seed,
                                     const BlobStore& store) {
  if (count < 1) fail(ErrorCode::invalid_params, "candidate count must be >= 1");
  std::vector<Candidate> out;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    out.push_back(Candidate{
        ModalityPayload::from_text(backend.complete_text(prompt, attachments, params, seed, store)),
        prompt, backend.id(), static_cast<std::uint32_t>(i), seed});
  }
  return out;
}

}  // namespace mb
