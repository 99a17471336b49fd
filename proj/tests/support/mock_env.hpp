#pragma once

#include <memory>

#include "modbridge/backends/mock.hpp"
#include "modbridge/backends/registry.hpp"
#include "modbridge/paradigms/pipelines.hpp"
#include "modbridge/util/media.hpp"

namespace mb::testing {

inline BackendDescriptor mock_descriptor(const std::string& id, Role role) {
  BackendDescriptor d;
  d.backend_id = id;
  d.model_name = id;
  d.role = role;
  d.transport = Transport::mock;
  return d;
}

// Mock backends for every role, routed the obvious way. Members may be
// replaced (e.g. with a ScriptedBackend) before building the env.
struct MockStack {
  BackendSet backends;
  Routing routing;
  BlobStore store{""};

  MockStack() {
    add(mock_descriptor("img", Role::image_gen));
    add(mock_descriptor("txt", Role::text_gen));
    add(mock_descriptor("aud", Role::audio_gen));
    add(mock_descriptor("emb", Role::embedder));
    add(mock_descriptor("judge", Role::judge));
    add(mock_descriptor("cap", Role::miner));
    add(mock_descriptor("local", Role::miner));
    add(mock_descriptor("strong", Role::miner));
    add(mock_descriptor("reasoner", Role::reasoner));
    routing = Routing{"img", "txt", "aud", "emb", "judge", "cap", "local", "strong", "reasoner", "strong", "strong"};
  }

  void add(const BackendDescriptor& d) { backends.add(std::make_shared<MockBackend>(d)); }
  void add(BackendPtr b) { backends.add(std::move(b)); }

  PipelineEnv env(int fan_out = 1) { return PipelineEnv{backends, routing, store, fan_out}; }

  // Sample with text, a small PNG and a short WAV.
  Sample sample(const std::string& id = "s1", const std::string& text = "A red kettle whistles in a kitchen.") {
    Sample s;
    s.id = id;
    s.payloads.emplace(ModalityKind::text, ModalityPayload::from_text(text));
    s.payloads.emplace(ModalityKind::image,
                       ModalityPayload::from_blob(ModalityKind::image,
                                                  store.put(encode_png_solid(8, 8, Rgb{200, 10, 10}), "image/png")));
    std::vector<double> tone(1600);
    for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = 0.3 * std::sin(0.05 * static_cast<double>(i));
    s.payloads.emplace(ModalityKind::audio,
                       ModalityPayload::from_blob(ModalityKind::audio, store.put(encode_wav_mono16(tone, 16000), "audio/wav")));
    return s;
  }
};

// Small media so the tests stay fast.
inline GenerationParams small_params(int n = 5, std::uint64_t seed = 1) {
  GenerationParams p;
  p.candidate_count = n;
  p.seed = seed;
  p.image.width = 8;
  p.image.height = 8;
  p.audio.duration_seconds = 0.05;
  return p;
}

}  // namespace mb::testing
