#pragma once

#include <string>
#include <vector>

#include "modbridge/backends/backend.hpp"
#include "modbridge/backends/retry.hpp"
#include "modbridge/core/json.hpp"

namespace mb {

// Client side of the sidecar protocol. Requests are
//   {request_id, op, model_name, params, inputs}
// and responses
//   {request_id, status, outputs, error}.
// request_id is a digest of the rest of the envelope, so retries of the same
// request carry the same id and the service can deduplicate them.
class SidecarClient {
 public:
  SidecarClient(std::string endpoint, double timeout_seconds, int max_retries, RetryBackoff backoff,
                Sleeper sleeper = real_sleeper());

  static json make_envelope(const std::string& op, const std::string& model_name, json params,
                            json inputs);
  // {kind, text} or {kind, media_type, data_b64}.
  static json encode_input(const ModalityPayload& payload, const BlobStore& store);

  // POSTs the envelope to `path` and returns the validated `outputs` array.
  json call(const std::string& path, const json& envelope) const;
  json health() const;

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  double timeout_seconds_;
  int max_retries_;
  RetryBackoff backoff_;
  Sleeper sleeper_;
};

class SidecarBackend : public Backend {
 public:
  explicit SidecarBackend(BackendDescriptor d, Sleeper sleeper = real_sleeper());

  const SidecarClient& client() const { return client_; }

 protected:
  std::string do_complete_text(const std::string& prompt, const std::vector<ModalityPayload>& attachments,
                               const TextParams& params, std::uint64_t seed,
                               const BlobStore& store) override;
  std::vector<Media> do_generate_image(const std::string& prompt, const ImageParams& params, int count,
                                       std::uint64_t base_seed) override;
  std::vector<Media> do_generate_audio(const std::string& prompt, const AudioParams& params, int count,
                                       std::uint64_t base_seed) override;
  std::vector<double> do_embed(const ModalityPayload& payload, const BlobStore& store) override;

 private:
  std::vector<Media> decode_media(const json& outputs, const std::string& kind) const;

  SidecarClient client_;
};

}  // namespace mb
