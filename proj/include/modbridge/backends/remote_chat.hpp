#pragma once

#include "modbridge/backends/backend.hpp"
#include "modbridge/backends/retry.hpp"
#include "modbridge/core/json.hpp"

namespace mb {

// OpenAI-compatible chat-completions client. The endpoint is the API base
// (".../v1"); the bearer token comes from MB_API_KEY_<BACKEND_ID>.
class RemoteChatBackend : public Backend {
 public:
  explicit RemoteChatBackend(BackendDescriptor d, Sleeper sleeper = real_sleeper());

  // Request body for a completion; exposed for contract tests.
  json chat_request(const std::string& prompt, const std::vector<ModalityPayload>& attachments,
                    const TextParams& params, std::uint64_t seed, const BlobStore& store) const;

 protected:
  std::string do_complete_text(const std::string& prompt, const std::vector<ModalityPayload>& attachments,
                               const TextParams& params, std::uint64_t seed,
                               const BlobStore& store) override;
  std::vector<double> do_embed(const ModalityPayload& payload, const BlobStore& store) override;

 private:
  json post(const std::string& path, const json& body);

  Sleeper sleeper_;
};

}  // namespace mb
