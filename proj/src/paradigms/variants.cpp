#include "modbridge/paradigms/variants.hpp"

#include "modbridge/error.hpp"

namespace mb {

const std::vector<GeneratorInfo>& generator_roster() {
  static const std::vector<GeneratorInfo> roster = {
      {"sd3.5", "SD3.5", ModalityKind::image},
      {"flux.1-dev", "FLUX.1 dev", ModalityKind::image},
      {"qwen2.5-vl-7b", "Qwen2.5-VL-7B", ModalityKind::text},
      {"qwen2.5-omni-7b", "Qwen2.5-Omni-7B", ModalityKind::text},
      {"audioldm2", "AudioLDM 2", ModalityKind::audio},
      {"sa1.0", "SA 1.0", ModalityKind::audio},
  };
  return roster;
}

const GeneratorInfo& generator_info(std::string_view id) {
  for (const auto& g : generator_roster())
    if (g.id == id) return g;
  fail(ErrorCode::invalid_params, "unknown generator '" + std::string(id) + "'");
}

std::vector<VariantSpec> enumerate_variants() {
  // The ranked listing puts Omni ahead of VL.
  static constexpr std::string_view ranked_order[] = {"sd3.5",           "flux.1-dev", "qwen2.5-omni-7b",
                                                      "qwen2.5-vl-7b",   "audioldm2",  "sa1.0"};
  std::vector<VariantSpec> out;
  for (const auto& g : generator_roster())
    out.push_back({std::string(g.id), Ranker::none, Miner::none, g.output});
  std::vector<VariantSpec> ranked;
  for (Ranker r : {Ranker::embedding, Ranker::judge})
    for (auto id : ranked_order)
      ranked.push_back({std::string(id), r, Miner::none, generator_info(id).output});
  out.insert(out.end(), ranked.begin(), ranked.end());
  for (Ranker r : {Ranker::embedding, Ranker::judge})
    for (Miner m : {Miner::local_lmm, Miner::strong_lmm})
      for (const auto& v : ranked)
        if (v.ranker == r) out.push_back({v.generator_id, r, m, v.target_kind});
  return out;
}

std::string display_name(const VariantSpec& v) {
  std::string name(generator_info(v.generator_id).display_name);
  if (v.ranker == Ranker::embedding) name += "+IB";
  if (v.ranker == Ranker::judge) name += "+MJ";
  if (v.miner == Miner::local_lmm) name = "M+" + name;
  if (v.miner == Miner::strong_lmm) name = "4o+" + name;
  return name;
}

Paradigm paradigm_of(const VariantSpec& v) {
  if (v.miner != Miner::none) return Paradigm::p3;
  return v.ranker == Ranker::none ? Paradigm::p1 : Paradigm::p2;
}

VariantSpec find_variant(std::string_view name) {
  for (const auto& v : enumerate_variants())
    if (v.id() == name || display_name(v) == name) return v;
  fail(ErrorCode::invalid_params, "unknown variant '" + std::string(name) + "'");
}

}  // namespace mb
