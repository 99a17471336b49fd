#include "modbridge/harness/demo.hpp"

#include <cmath>
#include <fstream>

#include "modbridge/backends/registry.hpp"
#include "modbridge/paradigms/variants.hpp"
#include "modbridge/util/media.hpp"

namespace mb {

namespace fs = std::filesystem;

namespace {

constexpr int kToySide = 64;
constexpr int kToyRate = 16000;

struct ToyColour {
  const char* name;
  Rgb rgb;
};
constexpr ToyColour kColours[] = {{"red", {200, 40, 40}},   {"green", {40, 160, 60}}, {"blue", {40, 70, 200}},
                                  {"yellow", {230, 210, 50}}, {"white", {240, 240, 240}}};
constexpr const char* kObjects[] = {"kettle", "bicycle", "dog", "violin"};
constexpr const char* kPlaces[] = {"in a quiet kitchen", "on a busy street", "in a sunny park",
                                   "inside a small studio", "beside a calm lake"};
constexpr const char* kSounds[] = {"whistling softly", "ringing its bell", "barking twice", "playing a slow tune"};

}  // namespace

fs::path make_toy_dataset(const fs::path& dir, std::size_t count) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "audio");
  Manifest m{"toy", dir, {}};
  for (std::size_t i = 0; i < count; ++i) {
    const auto& colour = kColours[i % std::size(kColours)];
    const char* object = kObjects[i % std::size(kObjects)];
    char id[32];
    std::snprintf(id, sizeof id, "toy-%02zu", i + 1);
    const std::string text = std::string("A ") + colour.name + " " + object + " " + kSounds[i % std::size(kSounds)] +
                             " " + kPlaces[(i / 2) % std::size(kPlaces)] + ".";
    const std::string png = encode_png_solid(kToySide, kToySide, colour.rgb);
    std::vector<double> tone(kToyRate);
    const double freq = 220.0 + 55.0 * static_cast<double>(i % 8);
    for (std::size_t k = 0; k < tone.size(); ++k)
      tone[k] = 0.4 * std::sin(2.0 * M_PI * freq * static_cast<double>(k) / kToyRate);
    const std::string wav = encode_wav_mono16(tone, kToyRate);
    const std::string image_path = std::string("images/") + id + ".png";
    const std::string audio_path = std::string("audio/") + id + ".wav";
    std::ofstream(dir / image_path, std::ios::binary) << png;
    std::ofstream(dir / audio_path, std::ios::binary) << wav;
    Sample s;
    s.id = id;
    s.payloads.emplace(ModalityKind::text, ModalityPayload::from_text(text));
    s.payloads.emplace(ModalityKind::image, ModalityPayload::from_blob(ModalityKind::image,
                                                                       {image_path, "image/png", png.size()}));
    s.payloads.emplace(ModalityKind::audio, ModalityPayload::from_blob(ModalityKind::audio,
                                                                       {audio_path, "audio/wav", wav.size()}));
    s.labels = std::vector<std::string>{object};
    m.samples.push_back(std::move(s));
  }
  const fs::path manifest = dir / "toy.jsonl";
  write_manifest(m, manifest);
  return manifest;
}

std::vector<BackendDescriptor> mock_backends() {
  auto make = [](const char* id, Role role) {
    BackendDescriptor d;
    d.backend_id = id;
    d.model_name = id;
    d.role = role;
    d.transport = Transport::mock;
    return d;
  };
  std::vector<BackendDescriptor> out;
  for (const auto& g : generator_roster())
    out.push_back(make(g.id.data(), g.output == ModalityKind::image   ? Role::image_gen
                                    : g.output == ModalityKind::audio ? Role::audio_gen
                                                                      : Role::text_gen));
  out.push_back(make("imagebind", Role::embedder));
  out.push_back(make("gpt-4o-judge", Role::judge));
  out.push_back(make("qwen2.5-vl-7b-miner", Role::miner));
  out.push_back(make("gpt-4o-miner", Role::miner));
  out.push_back(make("deepseek-r1", Role::reasoner));
  return out;
}

Routing mock_routing() {
  Routing r;
  r.image_gen = "sd3.5";
  r.text_gen = "qwen2.5-omni-7b";
  r.audio_gen = "audioldm2";
  r.embedder = "imagebind";
  r.judge = "gpt-4o-judge";
  r.captioner = "qwen2.5-omni-7b";
  r.local_miner = "qwen2.5-vl-7b-miner";
  r.strong_miner = "gpt-4o-miner";
  r.reasoner = "deepseek-r1";
  r.miner = "gpt-4o-miner";
  r.summarizer = "gpt-4o-miner";
  return r;
}

ExperimentConfig mock_config(Paradigm paradigm, ModalityKind target, double rate, std::uint64_t seed) {
  ExperimentConfig c;
  c.backends = mock_backends();
  c.pipeline.paradigm = paradigm;
  c.pipeline.routing = mock_routing();
  c.pipeline.params.seed = seed;
  c.pipeline.params.image.width = kToySide;
  c.pipeline.params.image.height = kToySide;
  c.pipeline.params.audio.duration_seconds = 1.0;
  c.pipeline.fan_out = 1;
  c.experiment.target_kind = target;
  c.experiment.missing_rate = rate;
  c.experiment.mask_seed = seed;
  c.experiment.domain_description = "everyday scenes described by a caption, a photo and a short sound clip";
  c.experiment.parallel = 1;
  std::string generator;
  for (const auto& g : generator_roster())
    if (g.output == target) {
      generator = std::string(g.id);
      break;
    }
  switch (paradigm) {
    case Paradigm::p1: c.pipeline.variant = VariantSpec{generator, Ranker::none, Miner::none, target}; break;
    case Paradigm::p2: c.pipeline.variant = VariantSpec{generator, Ranker::embedding, Miner::none, target}; break;
    case Paradigm::p3: c.pipeline.variant = VariantSpec{generator, Ranker::judge, Miner::strong_lmm, target}; break;
    case Paradigm::afm2: break;
  }
  return c;
}

DemoReport run_mock_demo(const DemoOptions& options) {
  const fs::path manifest_path = make_toy_dataset(options.root / "toy");
  const Manifest manifest = load_manifest(manifest_path);
  std::vector<ExperimentConfig> configs;
  for (ModalityKind kind : options.kinds)
    for (double rate : options.rates) {
      for (Paradigm p : {Paradigm::p1, Paradigm::p2, Paradigm::p3, Paradigm::afm2})
        configs.push_back(mock_config(p, kind, rate, options.seed));
      for (int ablation = 0; ablation < 2; ++ablation) {
        auto c = mock_config(Paradigm::afm2, kind, rate, options.seed);
        (ablation == 0 ? c.pipeline.enable_miner : c.pipeline.enable_verifier) = false;
        configs.push_back(std::move(c));
      }
    }
  DemoReport report;
  RuleCache rules;
  BackendSet backends(mock_backends());
  for (auto& c : configs) {
    c.experiment.parallel = options.parallel;
    const auto mask = apply_missing_mask(manifest, c.experiment.target_kind, c.experiment.missing_rate,
                                         c.experiment.mask_seed);
    RunOptions run{options.root / "runs", options.clock, nullptr, &rules};
    report.results.push_back(run_experiment(manifest, mask, c, backends, run));
  }
  report.table = aggregate(report.results);
  return report;
}

}  // namespace mb
