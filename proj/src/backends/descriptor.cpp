#include "modbridge/backends/descriptor.hpp"

#include <algorithm>
#include <cctype>

#include "modbridge/error.hpp"

namespace mb {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::text_gen: return "text_gen";
    case Role::image_gen: return "image_gen";
    case Role::audio_gen: return "audio_gen";
    case Role::judge: return "judge";
    case Role::miner: return "miner";
    case Role::reasoner: return "reasoner";
    case Role::embedder: return "embedder";
  }
  return "text_gen";
}

std::string_view to_string(Transport t) {
  switch (t) {
    case Transport::remote_chat: return "remote_chat";
    case Transport::sidecar: return "sidecar";
    case Transport::mock: return "mock";
  }
  return "mock";
}

Role parse_role(std::string_view s) {
  for (auto r : {Role::text_gen, Role::image_gen, Role::audio_gen, Role::judge, Role::miner,
                 Role::reasoner, Role::embedder})
    if (to_string(r) == s) return r;
  fail(ErrorCode::schema_mismatch, "unknown backend role '" + std::string(s) + "'");
}

Transport parse_transport(std::string_view s) {
  for (auto t : {Transport::remote_chat, Transport::sidecar, Transport::mock})
    if (to_string(t) == s) return t;
  fail(ErrorCode::schema_mismatch, "unknown transport '" + std::string(s) + "'");
}

void BackendDescriptor::validate() const {
  if (backend_id.empty()) fail(ErrorCode::invalid_params, "backend_id is empty");
  if (transport != Transport::mock && endpoint.empty())
    fail(ErrorCode::invalid_params, backend_id + ": endpoint required for " +
                                        std::string(to_string(transport)));
  if (max_retries < 0) fail(ErrorCode::invalid_params, backend_id + ": max_retries < 0");
  if (!(timeout_seconds > 0)) fail(ErrorCode::invalid_params, backend_id + ": timeout must be positive");
  if (backoff.initial_seconds < 0 || backoff.multiplier < 1.0 || backoff.max_seconds < 0)
    fail(ErrorCode::invalid_params, backend_id + ": bad retry backoff");
  if (embedding_dim < 1) fail(ErrorCode::invalid_params, backend_id + ": embedding_dim < 1");
  if (permits < 1) fail(ErrorCode::invalid_params, backend_id + ": permits < 1");
}

bool BackendDescriptor::accepts(ModalityKind kind) const {
  return std::find(attachment_kinds.begin(), attachment_kinds.end(), kind) != attachment_kinds.end();
}

std::string BackendDescriptor::api_key_env() const {
  std::string name = "MB_API_KEY_";
  for (char c : backend_id)
    name.push_back(std::isalnum(static_cast<unsigned char>(c))
                       ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                       : '_');
  return name;
}

json to_json(const BackendDescriptor& d) {
  json kinds = json::array();
  for (auto k : d.attachment_kinds) kinds.push_back(to_json(k));
  return {{"backend_id", d.backend_id},
          {"role", std::string(to_string(d.role))},
          {"transport", std::string(to_string(d.transport))},
          {"endpoint", d.endpoint},
          {"model_name", d.model_name},
          {"timeout_seconds", d.timeout_seconds},
          {"max_retries", d.max_retries},
          {"retry_backoff",
           {{"initial_seconds", d.backoff.initial_seconds},
            {"multiplier", d.backoff.multiplier},
            {"max_seconds", d.backoff.max_seconds}}},
          {"attachment_kinds", kinds},
          {"embedding_dim", d.embedding_dim},
          {"permits", d.permits}};
}

template <>
BackendDescriptor from_json<BackendDescriptor>(const json& j) {
  constexpr std::string_view T = "BackendDescriptor";
  check_fields(j,
               {"backend_id", "role", "transport", "endpoint", "model_name", "timeout_seconds",
                "max_retries", "retry_backoff", "attachment_kinds", "embedding_dim", "permits"},
               T);
  BackendDescriptor d;
  d.backend_id = field<std::string>(j, "backend_id", T);
  d.role = parse_role(field<std::string>(j, "role", T));
  d.transport = parse_transport(field<std::string>(j, "transport", T));
  d.endpoint = field_or<std::string>(j, "endpoint", "", T);
  d.model_name = field_or<std::string>(j, "model_name", d.backend_id, T);
  d.timeout_seconds = field_or<double>(j, "timeout_seconds", d.timeout_seconds, T);
  d.max_retries = field_or<int>(j, "max_retries", d.max_retries, T);
  if (j.contains("retry_backoff")) {
    const auto& b = j.at("retry_backoff");
    constexpr std::string_view B = "BackendDescriptor.retry_backoff";
    check_fields(b, {"initial_seconds", "multiplier", "max_seconds"}, B);
    d.backoff.initial_seconds = field_or<double>(b, "initial_seconds", d.backoff.initial_seconds, B);
    d.backoff.multiplier = field_or<double>(b, "multiplier", d.backoff.multiplier, B);
    d.backoff.max_seconds = field_or<double>(b, "max_seconds", d.backoff.max_seconds, B);
  }
  if (j.contains("attachment_kinds")) {
    d.attachment_kinds.clear();
    for (const auto& k : j.at("attachment_kinds")) {
      if (!k.is_string()) schema_error(T, "attachment_kinds must be strings");
      d.attachment_kinds.push_back(parse_modality(k.get<std::string>()));
    }
  }
  d.embedding_dim = field_or<int>(j, "embedding_dim", d.embedding_dim, T);
  d.permits = field_or<int>(j, "permits", d.permits, T);
  d.validate();
  return d;
}

}  // namespace mb
