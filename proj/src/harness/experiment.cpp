#include "modbridge/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include "modbridge/error.hpp"
#include "modbridge/metrics/native.hpp"
#include "modbridge/paradigms/variants.hpp"
#include "modbridge/util/media.hpp"
#include "modbridge/util/parallel.hpp"

namespace mb {

namespace fs = std::filesystem;

Clock steady_clock_seconds() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

Clock frozen_clock() {
  return [] { return 0.0; };
}

std::string run_name(const ExperimentConfig& config) {
  std::string id = config.pipeline.pipeline_id();
  for (char& c : id)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '+' && c != '_') c = '_';
  const long pct = std::lround(config.experiment.missing_rate * 100.0);
  return id + "-" + std::string(to_string(config.experiment.target_kind)) + "-m" + std::to_string(pct) + "-" +
         config.hash();
}

namespace {

std::string file_safe(std::string s) {
  for (char& c : s)
    if (c == '/' || c == '\\' || c == '\0') c = '_';
  if (s == "." || s == "..") s = "_" + s;
  return s;
}

json error_json(const Error& e) { return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

json mining_json(const MiningStage& m) {
  json rules = json::object(), qa = json::object(), summaries = json::object();
  for (const auto& [k, list] : m.rules.questions) rules[std::string(to_string(k))] = list;
  for (const auto& [k, pairs] : m.qa) {
    json arr = json::array();
    for (const auto& p : pairs) arr.push_back({{"question", p.question}, {"answer", p.answer}});
    qa[std::string(to_string(k))] = arr;
  }
  for (const auto& [k, s] : m.summaries) summaries[std::string(to_string(k))] = s;
  return {{"reasoner_id", m.rules.reasoner_id}, {"rules", rules}, {"qa", qa}, {"summaries", summaries},
          {"notes", m.notes}};
}

json ranking_json(const RankedOutcome& o) {
  return {{"method", std::string(to_string(o.method))}, {"scores", o.scores}, {"best_index", o.best_index}};
}

// Appends lines in index order as soon as every earlier index is done.
class OrderedWriter {
 public:
  OrderedWriter(const fs::path& path, std::size_t n) : out_(path, std::ios::binary | std::ios::app), pending_(n) {
    if (!out_) fail(ErrorCode::fatal_config_error, "cannot append to " + path.string());
  }

  void put(std::size_t i, std::string line) {
    std::lock_guard lock(mu_);
    pending_[i] = std::move(line);
    while (next_ < pending_.size() && pending_[next_]) {
      out_ << *pending_[next_] << '\n';
      out_.flush();
      pending_[next_].reset();
      ++next_;
    }
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::vector<std::optional<std::string>> pending_;
  std::size_t next_ = 0;
};

struct SampleOutcome {
  json record;
  json trace;
};

std::shared_ptr<MetricService> metric_service(const ExperimentConfig& c) {
  if (c.experiment.metrics_endpoint.empty()) return std::make_shared<MockMetricService>();
  return std::make_shared<SidecarMetricService>(SidecarClient(c.experiment.metrics_endpoint, 120.0, 2, {}));
}

std::vector<double> audio_samples(const std::string& bytes, int& rate) {
  auto wav = decode_wav(bytes);
  rate = wav.sample_rate_hz;
  return std::move(wav.samples);
}

json sample_metrics(const Candidate& winner, const ModalityPayload& truth, const PipelineEnv& env,
                    MetricService& service) {
  json m = json::object();
  Backend& embedder = env.backends.get(env.routing.embedder);
  const auto similarity = [&] {
    return cosine_sim(embedder.embed(winner.payload, env.store), embedder.embed(truth, env.store));
  };
  switch (truth.kind()) {
    case ModalityKind::image: m["clip_i"] = similarity(); break;
    case ModalityKind::text:
      m["mer"] = mer_text(winner.payload.text(), truth.text());
      m["clip_t"] = similarity();
      break;
    case ModalityKind::audio: {
      int rate_gen = 0, rate_ref = 0;
      auto gen = audio_samples(env.store.read(winner.payload.blob()), rate_gen);
      auto ref = audio_samples(env.store.read(truth.blob()), rate_ref);
      if (rate_gen != rate_ref)
        fail(ErrorCode::invalid_params, "generated audio is " + std::to_string(rate_gen) + " Hz, reference " +
                                            std::to_string(rate_ref) + " Hz");
      const std::size_t n = std::min(gen.size(), ref.size());
      gen.resize(n);
      ref.resize(n);
      m["si_snr"] = si_snr(gen, ref);
      m["pesq"] = remote_metric(service, MetricKind::pesq, {winner.payload.blob()}, {truth.blob()}, env.store);
      break;
    }
  }
  return m;
}

}  // namespace

fs::path run_experiment(const Manifest& manifest, const MissingMask& mask, const ExperimentConfig& config,
                        const BackendSet& backends, const RunOptions& options) {
  check_routing(config);
  for (const auto& d : config.backends)
    if (!backends.has(d.backend_id)) fail(ErrorCode::fatal_config_error, "backend '" + d.backend_id + "' not built");
  const ModalityKind target = config.experiment.target_kind;
  if (mask.target_kind != target) fail(ErrorCode::fatal_config_error, "mask is for a different modality");
  const PipelineConfig& pc = config.pipeline;
  const std::string hash = config.hash();
  const fs::path run_dir = options.results_root / run_name(config);
  const fs::path results = run_dir / "results.jsonl";
  fs::create_directories(run_dir / "traces");
  const double started = options.clock();

  // Resume: ids already recorded under this config.
  std::set<std::string> done;
  bool has_aggregate = false;
  if (std::ifstream in(results); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;  // torn final line from an interrupted run
      }
      if (j.value("config_hash", "") != hash) continue;
      if (j.value("record", "") == "sample") done.insert(j.value("sample_id", ""));
      if (j.value("record", "") == "aggregate") has_aggregate = true;
    }
  }
  // A torn last line would glue onto the next record.
  if (fs::exists(results) && fs::file_size(results) > 0) {
    std::ifstream in(results, std::ios::binary);
    in.seekg(-1, std::ios::end);
    if (in.get() != '\n') std::ofstream(results, std::ios::binary | std::ios::app) << '\n';
  }

  std::vector<const Sample*> todo;
  for (const auto& s : manifest.samples)
    if (mask.contains(s.id) && !done.count(s.id)) todo.push_back(&s);

  auto service = options.metrics ? options.metrics : metric_service(config);
  RuleCache local_rules;
  RuleCache* rules = options.rules ? options.rules : &local_rules;
  BlobStore run_store(manifest.data_root, run_dir);
  const int n_candidates = pc.paradigm == Paradigm::p1 ? 1 : pc.params.candidate_count;

  OrderedWriter writer(results, todo.size());
  parallel_for(todo.size(), config.experiment.parallel, [&](std::size_t i) {
    const Sample& full = *todo[i];
    const Sample masked = full.without(target);
    const ModalityPayload& truth = *full.find(target);
    BlobStore scratch(run_store);
    const PipelineEnv env{backends, pc.routing, scratch, pc.fan_out};
    const double t0 = options.clock();
    json record = {{"schema_version", kResultsSchemaVersion},
                   {"record", "sample"},
                   {"config_hash", hash},
                   {"pipeline_id", pc.pipeline_id()},
                   {"paradigm", std::string(to_string(pc.paradigm))},
                   {"sample_id", full.id},
                   {"target_kind", std::string(to_string(target))},
                   {"missing_rate", mask.rate},
                   {"candidate_count", n_candidates},
                   {"metrics", json::object()},
                   {"artifacts", json::array()},
                   {"error", nullptr}};
    json trace = {{"schema_version", kResultsSchemaVersion},
                  {"sample_id", full.id},
                  {"pipeline_id", pc.pipeline_id()},
                  {"error", nullptr}};
    try {
      std::optional<Candidate> winner;
      try {
        switch (pc.paradigm) {
          case Paradigm::p1: {
            GenerationParams p = pc.params;
            p.candidate_count = 1;
            winner = run_paradigm1(masked, target, generator_for(*pc.variant, env), p, env);
            trace["candidates"] = json::array({to_json(*winner)});
            break;
          }
          case Paradigm::p2:
          case Paradigm::p3: {
            auto r = pc.paradigm == Paradigm::p2
                         ? run_paradigm2(masked, target, *pc.variant, pc.params, env)
                         : run_paradigm3(masked, target, *pc.variant, pc.params, pc.granularity, env);
            json cands = json::array();
            for (const auto& c : r.candidates) cands.push_back(to_json(c));
            trace["candidates"] = cands;
            trace["ranking"] = ranking_json(*r.outcome);
            if (pc.paradigm == Paradigm::p3) trace["mined_prompts"] = r.mined_prompts;
            winner = std::move(r.winner);
            break;
          }
          case Paradigm::afm2: {
            const AgentEnv agent_env{env, rules, manifest.dataset_name, config.experiment.domain_description};
            try {
              auto r = run_afm2(masked, target, pc, agent_env);
              trace["mining"] = r.mining ? mining_json(*r.mining) : json(nullptr);
              trace["trace"] = to_json(r.trace);
              record["rounds_used"] = r.trace.rounds.size();
              winner = std::move(r.final_candidate);
            } catch (const SampleFailure& f) {
              trace["mining"] = f.mining() ? mining_json(*f.mining()) : json(nullptr);
              trace["trace"] = to_json(f.partial_trace());
              throw;
            }
            break;
          }
        }
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        // Library bugs and I/O failures still only fail this sample.
        fail(ErrorCode::invariant_violation, e.what());
      }
      if (!winner->payload.is_text()) {
        scratch.persist(winner->payload.blob());
        record["artifacts"].push_back(winner->payload.blob().path);
      } else {
        record["prediction_text"] = winner->payload.text();
      }
      record["metrics"] = sample_metrics(*winner, truth, env, *service);
    } catch (const Error& e) {
      record["error"] = error_json(e);
      trace["error"] = error_json(e);
    }
    record["wall_time_seconds"] = options.clock() - t0;
    std::ofstream(run_dir / "traces" / (file_safe(full.id) + ".json"), std::ios::binary) << trace.dump(2) << '\n';
    writer.put(i, record.dump());
  });

  // Corpus metrics over every successful sample recorded for this config.
  std::size_t records = 0, errors = 0;
  std::vector<std::pair<std::string, std::string>> winners;  // (artifact path, sample id)
  {
    std::ifstream in(results);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;
      }
      if (j.value("config_hash", "") != hash || j.value("record", "") != "sample") continue;
      ++records;
      if (!j.at("error").is_null()) {
        ++errors;
        continue;
      }
      if (target != ModalityKind::image) continue;
      winners.emplace_back(j.at("artifacts").at(0).get<std::string>(), j.at("sample_id").get<std::string>());
    }
  }
  if (!todo.empty() || !has_aggregate) {
    json agg = {{"schema_version", kResultsSchemaVersion},
                {"record", "aggregate"},
                {"config_hash", hash},
                {"pipeline_id", pc.pipeline_id()},
                {"paradigm", std::string(to_string(pc.paradigm))},
                {"target_kind", std::string(to_string(target))},
                {"missing_rate", mask.rate},
                {"candidate_count", n_candidates},
                {"metrics", json::object()},
                {"error", nullptr}};
    if (!winners.empty()) {
      try {
        std::vector<BlobRef> generated, references;
        for (const auto& [path, id] : winners) {
          std::error_code ec;
          const auto size = fs::file_size(run_dir / path, ec);
          if (ec) fail(ErrorCode::missing_blob, path);
          generated.push_back(BlobRef{path, "image/png", size});
          references.push_back(manifest.get(id).find(target)->blob());
        }
        agg["metrics"]["fid"] = remote_metric(*service, MetricKind::fid, generated, references, run_store);
      } catch (const Error& e) {
        agg["error"] = error_json(e);
      }
    }
    std::ofstream(results, std::ios::binary | std::ios::app) << agg.dump() << '\n';
  }

  json descriptors = json::array();
  for (const auto& d : backends.descriptors()) descriptors.push_back(to_json(d));
  const json summary = {{"schema_version", kResultsSchemaVersion},
                        {"run", run_name(config)},
                        {"config_hash", hash},
                        {"config", to_json(config)},
                        {"dataset", manifest.dataset_name},
                        {"mask", to_json(mask)},
                        {"seeds", {{"mask", mask.seed}, {"generation", pc.params.seed}}},
                        {"backends", descriptors},
                        {"records", records},
                        {"errors", errors},
                        {"started_at", started},
                        {"finished_at", options.clock()}};
  std::ofstream(run_dir / "summary.json", std::ios::binary) << summary.dump(2) << '\n';
  return results;
}

}  // namespace mb
