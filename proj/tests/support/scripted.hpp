#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "modbridge/backends/backend.hpp"
#include "modbridge/core/json.hpp"

namespace mb::testing {

// Backend whose text replies come from a callback. Media and embeddings
// are unsupported unless a subclass overrides them.
class ScriptedBackend : public Backend {
 public:
  using Handler = std::function<std::string(const std::string& prompt,
                                            const std::vector<ModalityPayload>& attachments,
                                            std::uint64_t seed)>;

  ScriptedBackend(std::string id, Role role, Handler handler)
      : Backend(descriptor_for(std::move(id), role)), handler_(std::move(handler)) {}

  int calls() const { return calls_.load(); }
  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

  static BackendDescriptor descriptor_for(std::string id, Role role) {
    BackendDescriptor d;
    d.backend_id = id;
    d.model_name = std::move(id);
    d.role = role;
    d.transport = Transport::mock;
    return d;
  }

 protected:
  std::string do_complete_text(const std::string& prompt, const std::vector<ModalityPayload>& attachments,
                               const TextParams&, std::uint64_t seed, const BlobStore&) override {
    ++calls_;
    {
      std::lock_guard lock(mu_);
      prompts_.push_back(prompt);
    }
    return handler_(prompt, attachments, seed);
  }

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

// Verification reply with every criterion at `score`.
inline std::string judge_reply(ModalityKind kind, double score, std::uint32_t hallucinated = 0,
                               std::uint32_t total = 10) {
  json j = json::object();
  for (auto name : criterion_names(kind)) j[std::string(name)] = score;
  j["total_assertions"] = total;
  if (kind == ModalityKind::image) {
    json list = json::array();
    for (std::uint32_t i = 0; i < hallucinated; ++i) list.push_back("element " + std::to_string(i));
    j["hallucinated_elements"] = list;
  } else {
    j["hallucinated_assertions"] = hallucinated;
  }
  if (kind == ModalityKind::audio) j["noise_segments"] = 0;
  j["justifications"] = {{"semantic_alignment", "scripted"}};
  return "```json\n" + j.dump() + "\n```";
}

}  // namespace mb::testing
