#include "modbridge/backends/remote_chat.hpp"

#include <cstdlib>

#include "http.hpp"
#include "modbridge/util/digest.hpp"

namespace mb {

namespace {

std::string audio_format(const std::string& media_type) {
  if (media_type == "audio/mpeg" || media_type == "audio/mp3") return "mp3";
  return "wav";
}

[[noreturn]] void protocol_error(const std::string& who, const std::string& what) {
  fail(ErrorCode::transport_error, who + ": protocol error, " + what);
}

}  // namespace

RemoteChatBackend::RemoteChatBackend(BackendDescriptor d, Sleeper sleeper)
    : Backend(std::move(d)), sleeper_(std::move(sleeper)) {}

json RemoteChatBackend::chat_request(const std::string& prompt,
                                     const std::vector<ModalityPayload>& attachments,
                                     const TextParams& params, std::uint64_t seed,
                                     const BlobStore& store) const {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  for (const auto& a : attachments) {
    if (a.is_text()) {
      content.push_back({{"type", "text"}, {"text", a.text()}});
      continue;
    }
    const std::string b64 = base64_encode(store.read(a.blob()));
    if (a.kind() == ModalityKind::image)
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + a.blob().media_type + ";base64," + b64}}}});
    else
      content.push_back({{"type", "input_audio"},
                         {"input_audio", {{"data", b64}, {"format", audio_format(a.blob().media_type)}}}});
  }
  return {{"model", descriptor().model_name},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})},
          {"max_tokens", params.max_tokens},
          {"temperature", params.temperature},
          {"top_p", params.top_p},
          {"presence_penalty", params.presence_penalty},
          {"seed", seed}};
}

json RemoteChatBackend::post(const std::string& path, const json& body) {
  const std::string payload = body.dump();
  const std::string key = sha256_hex(path + "\n" + payload);
  httplib::Headers headers{{"Idempotency-Key", key}};
  if (const char* token = std::getenv(descriptor().api_key_env().c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + token);
  const auto& d = descriptor();
  return with_retries(d.max_retries, d.backoff, sleeper_, leading_u64(sha256(key)), [&] {
    auto r = detail::http_send(d.endpoint, "POST", path, payload, headers, d.timeout_seconds);
    detail::check_status(r, id());
    json j = json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) protocol_error(id(), "response is not a JSON object");
    return j;
  });
}

std::string RemoteChatBackend::do_complete_text(const std::string& prompt,
                                                const std::vector<ModalityPayload>& attachments,
                                                const TextParams& params, std::uint64_t seed,
                                                const BlobStore& store) {
  const json reply = post("/chat/completions", chat_request(prompt, attachments, params, seed, store));
  try {
    const json& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string text;
      for (const auto& part : content)
        if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
      return text;
    }
  } catch (const json::exception& e) {
    protocol_error(id(), e.what());
  }
  protocol_error(id(), "message content is neither a string nor a part list");
}

std::vector<double> RemoteChatBackend::do_embed(const ModalityPayload& payload, const BlobStore&) {
  if (!payload.is_text())
    fail(ErrorCode::unsupported_modality, id() + " embeds text only");
  const json reply =
      post("/embeddings", {{"model", descriptor().model_name}, {"input", payload.text()}});
  try {
    return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    protocol_error(id(), e.what());
  }
}

}  // namespace mb
