#pragma once

#include <string_view>

#include "modbridge/backends/backend.hpp"

namespace mb {

// Deterministic in-process stand-in for every role. Text replies are chosen
// by recognising which library template the prompt was rendered from; media
// and embeddings are pure functions of their inputs.
//
// Judge rules, kept stable so tests can construct known outcomes:
//   d = digest_parts({candidate bytes, reference bytes})
//   criterion i (other than factual_groundedness) = 3 + d[i] % 3
//   N = 4 + d[6] % 7
//   H = 0 if the candidate digest has even parity, else 1 + d[7] % 3
//   factual_groundedness = factual_groundedness_score(H, N)
//   audio noise_segments = d[8] % 3
// Ranking rule: accuracy = (d[0] % 11) / 2, relevance = (d[1] % 11) / 2 with
// d = digest_parts({prompt, candidate bytes}).
class MockBackend : public Backend {
 public:
  using Backend::Backend;

 protected:
  std::string do_complete_text(const std::string& prompt, const std::vector<ModalityPayload>& attachments,
                               const TextParams& params, std::uint64_t seed,
                               const BlobStore& store) override;
  std::vector<Media> do_generate_image(const std::string& prompt, const ImageParams& params, int count,
                                       std::uint64_t base_seed) override;
  std::vector<Media> do_generate_audio(const std::string& prompt, const AudioParams& params, int count,
                                       std::uint64_t base_seed) override;
  std::vector<double> do_embed(const ModalityPayload& payload, const BlobStore& store) override;
};

// Even popcount of the first 64 bits of sha256(candidate bytes).
bool mock_candidate_parity_even(std::string_view candidate_bytes);

// Minimum length the mock pads image and audio prompts to.
inline constexpr std::size_t kMockMinPromptChars = 160;

}  // namespace mb
