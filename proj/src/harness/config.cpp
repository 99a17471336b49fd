#include "modbridge/harness/config.hpp"

#include <fstream>
#include <map>

#include "modbridge/error.hpp"
#include "modbridge/paradigms/variants.hpp"
#include "modbridge/util/digest.hpp"

namespace mb {

namespace {

json settings_json(const ExperimentSettings& s) {
  return {{"target_kind", std::string(to_string(s.target_kind))},
          {"missing_rate", s.missing_rate},
          {"mask_seed", s.mask_seed},
          {"domain_description", s.domain_description},
          {"metrics_endpoint", s.metrics_endpoint},
          {"parallel", s.parallel}};
}

ExperimentSettings settings_from_json(const json& j) {
  constexpr std::string_view T = "experiment";
  check_fields(j, {"target_kind", "missing_rate", "mask_seed", "domain_description", "metrics_endpoint", "parallel"},
               T);
  ExperimentSettings s;
  s.target_kind = parse_modality(field_or<std::string>(j, "target_kind", "image", T));
  s.missing_rate = field_or<double>(j, "missing_rate", s.missing_rate, T);
  s.mask_seed = field_or<std::uint64_t>(j, "mask_seed", s.mask_seed, T);
  s.domain_description = field_or<std::string>(j, "domain_description", s.domain_description, T);
  s.metrics_endpoint = field_or<std::string>(j, "metrics_endpoint", s.metrics_endpoint, T);
  s.parallel = field_or<int>(j, "parallel", s.parallel, T);
  if (!(s.missing_rate >= 0.0 && s.missing_rate <= 1.0)) schema_error(T, "missing_rate must lie in [0, 1]");
  if (s.parallel < 1) schema_error(T, "parallel must be >= 1");
  return s;
}

}  // namespace

std::string ExperimentConfig::hash() const { return sha256_hex(to_json(*this).dump()).substr(0, 16); }

json to_json(const ExperimentConfig& c) {
  json j = to_json(c.pipeline);
  json backends = json::array();
  for (const auto& d : c.backends) backends.push_back(to_json(d));
  j["backends"] = backends;
  j["experiment"] = settings_json(c.experiment);
  return j;
}

ExperimentConfig config_from_json(const json& doc) {
  try {
    if (!doc.is_object()) fail(ErrorCode::schema_mismatch, "config must be an object");
    json pipeline = doc;
    pipeline.erase("backends");
    pipeline.erase("experiment");
    if (auto it = pipeline.find("variant"); it != pipeline.end() && it->is_string())
      *it = to_json(find_variant(it->get<std::string>()));
    ExperimentConfig c;
    c.pipeline = from_json<PipelineConfig>(pipeline);
    if (auto it = doc.find("backends"); it != doc.end()) {
      if (!it->is_array()) fail(ErrorCode::schema_mismatch, "backends must be a list");
      for (const auto& d : *it) c.backends.push_back(from_json<BackendDescriptor>(d));
    }
    c.experiment = settings_from_json(doc.value("experiment", json::object()));
    c.pipeline.validate();
    if (c.pipeline.variant) {
      c.pipeline.variant->validate(generator_info(c.pipeline.variant->generator_id).output);
      if (c.pipeline.variant->target_kind != c.experiment.target_kind)
        fail(ErrorCode::invariant_violation, "variant target differs from experiment.target_kind");
    }
    return c;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::fatal_config_error) throw;
    fail(ErrorCode::fatal_config_error, e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::fatal_config_error, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::fatal_config_error, path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(ErrorCode::fatal_config_error, "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail(ErrorCode::fatal_config_error, "override key '" + key + "' has an empty part");
    if (!node->is_object()) {
      if (!node->is_null()) fail(ErrorCode::fatal_config_error, "override key '" + key + "' walks into a value");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void check_routing(const ExperimentConfig& c) {
  std::map<std::string, Role> roles;
  for (const auto& d : c.backends) roles[d.backend_id] = d.role;
  const auto& p = c.pipeline;
  const auto& r = p.routing;
  const ModalityKind target = c.experiment.target_kind;
  auto need = [&](const std::string& what, const std::string& id, std::initializer_list<Role> ok) {
    if (id.empty()) fail(ErrorCode::fatal_config_error, "routing." + what + " is not set");
    auto it = roles.find(id);
    if (it == roles.end()) fail(ErrorCode::fatal_config_error, "routing." + what + ": no backend '" + id + "'");
    for (Role role : ok)
      if (it->second == role) return;
    fail(ErrorCode::fatal_config_error,
         "backend '" + id + "' has role " + std::string(to_string(it->second)) + ", unsuitable for " + what);
  };
  const std::initializer_list<Role> chat = {Role::text_gen, Role::miner, Role::reasoner, Role::judge};
  const Role gen_role = target == ModalityKind::image   ? Role::image_gen
                        : target == ModalityKind::audio ? Role::audio_gen
                                                        : Role::text_gen;
  const std::string gen_key = std::string(to_string(target)) + "_gen";
  need("embedder", r.embedder, {Role::embedder});
  // Captions are only needed when a sample has no text.
  if (target != ModalityKind::text && !r.captioner.empty()) need("captioner", r.captioner, chat);
  if (p.paradigm != Paradigm::afm2) {
    const VariantSpec& v = *p.variant;
    if (roles.count(v.generator_id))
      need("variant generator", v.generator_id, {gen_role});
    else
      need(gen_key, r.generator_for(target), {gen_role});
    if (v.ranker == Ranker::judge) need("judge", r.judge, chat);
    if (v.miner == Miner::local_lmm) need("local_miner", r.local_miner, chat);
    if (v.miner == Miner::strong_lmm) need("strong_miner", r.strong_miner, chat);
    return;
  }
  need(gen_key, r.generator_for(target), {gen_role});
  need("reasoner", r.reasoner, chat);
  if (p.enable_miner) {
    need("miner", r.miner, chat);
    need("summarizer", r.summarizer, chat);
  }
  if (p.enable_verifier) need("judge", r.judge, chat);
}

}  // namespace mb
