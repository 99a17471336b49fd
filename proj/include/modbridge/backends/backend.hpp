#pragma once

#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include "modbridge/backends/blob_store.hpp"
#include "modbridge/backends/descriptor.hpp"
#include "modbridge/backends/embedding.hpp"
#include "modbridge/core/types.hpp"
#include "modbridge/error.hpp"
#include "modbridge/prompts/library.hpp"

namespace mb {

// One model endpoint. The public calls check preconditions, hold one of the
// descriptor's permits for the duration of the call and then dispatch to the
// transport.
class Backend {
 public:
  explicit Backend(BackendDescriptor descriptor);
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendDescriptor& descriptor() const noexcept { return descriptor_; }
  const std::string& id() const noexcept { return descriptor_.backend_id; }

  std::string complete_text(const std::string& prompt, const std::vector<ModalityPayload>& attachments,
                            const TextParams& params, std::uint64_t seed, const BlobStore& store);

  // Candidates carry ordinals 0..count-1 and seed_used = base_seed + ordinal.
  std::vector<Candidate> generate_image(const std::string& prompt, const ImageParams& params, int count,
                                        std::uint64_t base_seed, BlobStore& store);
  std::vector<Candidate> generate_audio(const std::string& prompt, const AudioParams& params, int count,
                                        std::uint64_t base_seed, BlobStore& store);

  EmbeddingVector embed(const ModalityPayload& payload, const BlobStore& store);

 protected:
  struct Media {
    std::string bytes;
    std::string media_type;
  };

  virtual std::string do_complete_text(const std::string& prompt,
                                       const std::vector<ModalityPayload>& attachments,
                                       const TextParams& params, std::uint64_t seed,
                                       const BlobStore& store) = 0;
  // One entry per seed in [base_seed, base_seed + count).
  virtual std::vector<Media> do_generate_image(const std::string& prompt, const ImageParams& params,
                                               int count, std::uint64_t base_seed);
  virtual std::vector<Media> do_generate_audio(const std::string& prompt, const AudioParams& params,
                                               int count, std::uint64_t base_seed);
  virtual std::vector<double> do_embed(const ModalityPayload& payload, const BlobStore& store);

 private:
  std::vector<Candidate> wrap(ModalityKind kind, const std::string& prompt, std::vector<Media> media,
                              int count, std::uint64_t base_seed, BlobStore& store);

  BackendDescriptor descriptor_;
  std::counting_semaphore<1024> permits_;
};

using BackendPtr = std::shared_ptr<Backend>;

// Output parse failures that justify asking the model again.
bool is_format_error(const Error& e);

// Calls complete_text and parses the reply; on a format error re-asks up to
// `reasks` times with `reminder` appended to the prompt, then fails with
// `exhausted`.
template <typename Parse>
auto ask_parsed(Backend& backend, const std::string& prompt,
                const std::vector<ModalityPayload>& attachments, const TextParams& params,
                std::uint64_t seed, const BlobStore& store, int reasks, std::string_view reminder,
                ErrorCode exhausted, Parse&& parse) -> decltype(parse(std::string())) {
  std::string last_error;
  for (int attempt = 0; attempt <= reasks; ++attempt) {
    const std::string p = attempt == 0 ? prompt : prompt + "\n\n" + std::string(reminder);
    const std::string raw = backend.complete_text(p, attachments, params, seed, store);
    try {
      return parse(raw);
    } catch (const Error& e) {
      if (!is_format_error(e)) throw;
      last_error = e.what();
    }
  }
  fail(exhausted, backend.id() + " after " + std::to_string(reasks + 1) + " attempts: " + last_error);
}

inline constexpr int kJudgeReasks = 2;

// Renders the verification template, attaches the candidate followed by the
// references and parses the scorecard. Malformed replies are re-asked twice.
JudgeReport judge(Backend& backend, const ModalityPayload& candidate,
                  const std::vector<ModalityPayload>& references, std::string_view template_id,
                  const Bindings& bindings, const TextParams& params, std::uint64_t seed,
                  const BlobStore& store);

// Text candidates from a text generator: one complete_text call per ordinal,
// seeded base_seed + ordinal.
std::vector<Candidate> generate_text(Backend& backend, const std::string& prompt,
                                     const std::vector<ModalityPayload>& attachments,
                                     const TextParams& params, int count, std::uint64_t base_seed,
                                     const BlobStore& store);

}  // namespace mb
