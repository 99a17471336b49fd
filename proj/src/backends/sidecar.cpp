#include "modbridge/backends/sidecar.hpp"

#include <cmath>

#include "http.hpp"
#include "modbridge/util/digest.hpp"
#include "modbridge/util/media.hpp"

namespace mb {

namespace {

[[noreturn]] void protocol_error(const std::string& who, const std::string& what) {
  fail(ErrorCode::transport_error, who + ": protocol error, " + what);
}

}  // namespace

SidecarClient::SidecarClient(std::string endpoint, double timeout_seconds, int max_retries,
                             RetryBackoff backoff, Sleeper sleeper)
    : endpoint_(std::move(endpoint)),
      timeout_seconds_(timeout_seconds),
      max_retries_(max_retries),
      backoff_(backoff),
      sleeper_(std::move(sleeper)) {}

json SidecarClient::make_envelope(const std::string& op, const std::string& model_name, json params,
                                  json inputs) {
  json env = {{"op", op}, {"model_name", model_name}, {"params", std::move(params)},
              {"inputs", std::move(inputs)}};
  env["request_id"] = sha256_hex(env.dump());
  return env;
}

json SidecarClient::encode_input(const ModalityPayload& payload, const BlobStore& store) {
  if (payload.is_text()) return {{"kind", "text"}, {"text", payload.text()}};
  return {{"kind", to_string(payload.kind())},
          {"media_type", payload.blob().media_type},
          {"data_b64", base64_encode(store.read(payload.blob()))}};
}

json SidecarClient::call(const std::string& path, const json& envelope) const {
  const std::string body = envelope.dump();
  const std::string request_id = envelope.at("request_id").get<std::string>();
  const httplib::Headers headers{{"Idempotency-Key", request_id}};
  const std::string who = "sidecar " + endpoint_ + path;
  return with_retries(max_retries_, backoff_, sleeper_, leading_u64(sha256(request_id)), [&] {
    auto r = detail::http_send(endpoint_, "POST", path, body, headers, timeout_seconds_);
    detail::check_status(r, who);
    const json reply = json::parse(r.body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) protocol_error(who, "response is not a JSON object");
    if (reply.value("request_id", "") != request_id) protocol_error(who, "request_id not echoed");
    if (reply.value("status", "") != "ok") {
      const auto err = reply.contains("error") ? reply.at("error").dump() : std::string("unknown");
      fail(ErrorCode::transport_error, who + ": status " + reply.value("status", "?") + ", " + err);
    }
    if (!reply.contains("outputs") || !reply.at("outputs").is_array())
      protocol_error(who, "missing outputs array");
    return reply.at("outputs");
  });
}

json SidecarClient::health() const {
  const std::string who = "sidecar " + endpoint_ + "/v1/health";
  auto r = detail::http_send(endpoint_, "GET", "/v1/health", "", {}, timeout_seconds_);
  detail::check_status(r, who);
  json j = json::parse(r.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) protocol_error(who, "health reply is not a JSON object");
  return j;
}

SidecarBackend::SidecarBackend(BackendDescriptor d, Sleeper sleeper)
    : Backend(d),
      client_(d.endpoint, d.timeout_seconds, d.max_retries, d.backoff, std::move(sleeper)) {}

std::string SidecarBackend::do_complete_text(const std::string& prompt,
                                             const std::vector<ModalityPayload>& attachments,
                                             const TextParams& params, std::uint64_t seed,
                                             const BlobStore& store) {
  json inputs = json::array();
  for (const auto& a : attachments) inputs.push_back(SidecarClient::encode_input(a, store));
  const json outputs = client_.call(
      "/v1/complete", SidecarClient::make_envelope("complete", descriptor().model_name,
                                                   {{"prompt", prompt},
                                                    {"max_tokens", params.max_tokens},
                                                    {"temperature", params.temperature},
                                                    {"top_p", params.top_p},
                                                    {"presence_penalty", params.presence_penalty},
                                                    {"seed", seed}},
                                                   inputs));
  if (outputs.size() != 1 || !outputs[0].contains("text") || !outputs[0].at("text").is_string())
    protocol_error(id(), "complete must return one text output");
  return outputs[0].at("text").get<std::string>();
}

std::vector<Backend::Media> SidecarBackend::decode_media(const json& outputs, const std::string& kind) const {
  std::vector<Media> media;
  for (const auto& o : outputs) {
    if (!o.is_object() || o.value("kind", "") != kind || !o.contains("data_b64") ||
        !o.contains("media_type"))
      protocol_error(id(), "malformed " + kind + " output");
    media.push_back({base64_decode(o.at("data_b64").get<std::string>()),
                     o.at("media_type").get<std::string>()});
  }
  return media;
}

std::vector<Backend::Media> SidecarBackend::do_generate_image(const std::string& prompt,
                                                              const ImageParams& params, int count,
                                                              std::uint64_t base_seed) {
  const json outputs = client_.call(
      "/v1/generate/image",
      SidecarClient::make_envelope("generate_image", descriptor().model_name,
                                   {{"prompt", prompt},
                                    {"steps", params.steps},
                                    {"guidance_scale", params.guidance_scale},
                                    {"max_sequence_length", params.max_sequence_length},
                                    {"width", params.width},
                                    {"height", params.height},
                                    {"seed", base_seed},
                                    {"count", count}},
                                   json::array()));
  auto media = decode_media(outputs, "image");
  for (const auto& m : media) {
    if (m.media_type != "image/png") continue;
    const auto info = read_png_info(m.bytes);
    if (info.width != params.width || info.height != params.height)
      protocol_error(id(), "image dimensions differ from the request");
  }
  return media;
}

std::vector<Backend::Media> SidecarBackend::do_generate_audio(const std::string& prompt,
                                                              const AudioParams& params, int count,
                                                              std::uint64_t base_seed) {
  const json outputs = client_.call(
      "/v1/generate/audio",
      SidecarClient::make_envelope("generate_audio", descriptor().model_name,
                                   {{"prompt", prompt},
                                    {"steps", params.steps},
                                    {"duration_seconds", params.duration_seconds},
                                    {"sample_rate_hz", params.sample_rate_hz},
                                    {"seed", base_seed},
                                    {"count", count}},
                                   json::array()));
  auto media = decode_media(outputs, "audio");
  const auto expected = static_cast<std::size_t>(std::llround(params.duration_seconds * params.sample_rate_hz));
  for (const auto& m : media) {
    const auto pcm = decode_wav(m.bytes);
    if (pcm.sample_rate_hz != params.sample_rate_hz || pcm.samples.size() != expected)
      protocol_error(id(), "audio length or rate differs from the request");
  }
  return media;
}

std::vector<double> SidecarBackend::do_embed(const ModalityPayload& payload, const BlobStore& store) {
  const json outputs = client_.call(
      "/v1/embed", SidecarClient::make_envelope(
                       "embed", descriptor().model_name,
                       {{"modality", to_string(payload.kind())}},
                       json::array({SidecarClient::encode_input(payload, store)})));
  if (outputs.size() != 1 || !outputs[0].contains("vector"))
    protocol_error(id(), "embed must return one vector");
  try {
    auto v = outputs[0].at("vector").get<std::vector<double>>();
    if (outputs[0].contains("dimension") && outputs[0].at("dimension").get<std::size_t>() != v.size())
      protocol_error(id(), "declared dimension differs from vector length");
    return v;
  } catch (const json::exception& e) {
    protocol_error(id(), e.what());
  }
}

}  // namespace mb
