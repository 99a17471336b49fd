#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modbridge/core/json.hpp"
#include "modbridge/core/types.hpp"

namespace mb {

enum class Role { text_gen, image_gen, audio_gen, judge, miner, reasoner, embedder };
enum class Transport { remote_chat, sidecar, mock };

std::string_view to_string(Role r);
std::string_view to_string(Transport t);
Role parse_role(std::string_view s);
Transport parse_transport(std::string_view s);

struct RetryBackoff {
  double initial_seconds = 1.0;
  double multiplier = 2.0;
  double max_seconds = 60.0;
  bool operator==(const RetryBackoff&) const = default;
};

struct BackendDescriptor {
  std::string backend_id;
  Role role = Role::text_gen;
  Transport transport = Transport::mock;
  std::string endpoint;
  std::string model_name;
  double timeout_seconds = 120.0;
  int max_retries = 2;
  RetryBackoff backoff;
  // Payload kinds complete_text accepts as attachments.
  std::vector<ModalityKind> attachment_kinds = {ModalityKind::image, ModalityKind::text,
                                                ModalityKind::audio};
  int embedding_dim = 64;
  // Concurrent in-flight calls allowed on this backend.
  int permits = 4;

  void validate() const;
  bool accepts(ModalityKind kind) const;
  // MB_API_KEY_<BACKEND_ID>, upper-cased with non-alphanumerics as '_'.
  std::string api_key_env() const;
  bool operator==(const BackendDescriptor&) const = default;
};

json to_json(const BackendDescriptor& d);
template <>
BackendDescriptor from_json<BackendDescriptor>(const json& j);

}  // namespace mb
