#include "modbridge/agents/afm2.hpp"

#include <set>

#include "modbridge/error.hpp"

namespace mb {

namespace {

MiningStage run_miner(const Sample& sample, const PipelineConfig& config, const AgentEnv& env) {
  const auto& r = env.pipeline.routing;
  const auto& p = config.params;
  Backend& reasoner = env.pipeline.backends.get(r.reasoner);
  Backend& miner = env.pipeline.backends.get(r.miner);
  Backend& summarizer = env.pipeline.backends.get(r.summarizer);
  std::set<ModalityKind> kinds;
  for (const auto& o : sample.observed()) kinds.insert(o.kind());

  MiningStage stage;
  if (env.rules) {
    stage.rules = env.rules->get(env.dataset, env.domain_description, reasoner, p.text, p.seed, env.pipeline.store)
                      .restricted(kinds);
  } else {
    stage.rules = infer_rules(env.domain_description, kinds, reasoner, p.text, p.seed, env.pipeline.store);
  }
  for (const auto& payload : sample.observed()) {
    const ModalityKind k = payload.kind();
    auto mined = mine(payload, stage.rules.questions.at(k), miner, p.text, p.seed, env.pipeline.store,
                      env.pipeline.fan_out);
    for (auto& n : mined.notes) stage.notes.push_back(std::string(to_string(k)) + ": " + n);
    stage.summaries[k] = summarize(payload, mined.pairs, summarizer, p.text, p.seed, env.pipeline.store);
    stage.qa[k] = std::move(mined.pairs);
  }
  return stage;
}

std::vector<Candidate> text_candidates(const std::vector<std::string>& texts, const Guidance& g,
                                       const std::string& author, std::uint64_t seed) {
  std::vector<Candidate> out;
  for (std::size_t j = 0; j < texts.size(); ++j)
    out.push_back({ModalityPayload::from_text(texts[j]), g.text(), author, static_cast<std::uint32_t>(j),
                   seed + j});
  return out;
}

}  // namespace

Afm2Result run_afm2(const Sample& sample, ModalityKind target, const PipelineConfig& config,
                    const AgentEnv& env) {
  require(!sample.has(target), "sample " + sample.id + " already has " + std::string(to_string(target)));
  require(config.paradigm == Paradigm::afm2, "run_afm2 needs an afm2 config");
  config.validate();
  const auto& pe = env.pipeline;
  const auto& p = config.params;
  const auto observed = sample.observed();
  const int n = p.candidate_count;
  const VerifierSettings settings{config.threshold, config.penalty, config.penalty_cap};

  RefinementTrace trace;
  trace.verified = config.enable_verifier;
  std::optional<MiningStage> mining;
  try {
    Backend& reasoner = pe.backends.get(pe.routing.reasoner);
    Backend& generator = pe.backends.get(pe.routing.generator_for(target));
    Guidance g;
    std::vector<ModalityPayload> attachments;
    if (config.enable_miner) {
      mining = run_miner(sample, config, env);
      g.summaries = mining->summaries;
      g.prompts = synthesize_prompts(g, target, reasoner, n, p.text, p.seed, pe.store);
    } else {
      auto cond = direct_conditioning(sample, target, pe, p);
      if (const auto* text = sample.find(ModalityKind::text)) g.summaries[ModalityKind::text] = text->text();
      g.prompts = {std::move(cond.prompt)};
      attachments = std::move(cond.attachments);
    }

    for (int r = 0; r < config.max_rounds; ++r) {
      const std::uint64_t seed = p.seed + static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n);
      RoundRecord rec;
      rec.round_index = r + 1;
      rec.guidance_text = g.text();
      rec.prompts = g.prompts;
      if (target == ModalityKind::text && (r > 0 || config.enable_miner))
        rec.candidates = text_candidates(g.prompts, g, reasoner.id(), seed);
      else
        rec.candidates = generate_candidates(generator, target, g.prompts, attachments, p, n, seed, pe.store,
                                             pe.fan_out);

      if (!config.enable_verifier) {
        const auto ranked = rank_by_embedding(rec.candidates, observed, pe.backends.get(pe.routing.embedder),
                                              pe.store, pe.fan_out);
        rec.candidate_scores = ranked.scores;
        rec.best_index = ranked.best_index;
        rec.best_score = ranked.scores[ranked.best_index];
        rec.decision = Decision::accept;
        trace.final_candidate = rec.candidates[rec.best_index];
        trace.rounds.push_back(std::move(rec));
        break;
      }

      auto v = verify_batch(rec.candidates, observed, pe.backends.get(pe.routing.judge), settings, p.text, seed,
                            pe.store, pe.fan_out);
      rec.candidate_scores = v.scores;
      rec.best_index = v.best_index;
      rec.best_score = v.best_score;
      rec.feedbacks = v.feedbacks;
      if (v.decision == Decision::accept) {
        rec.decision = Decision::accept;
        trace.final_candidate = rec.candidates[rec.best_index];
        trace.rounds.push_back(std::move(rec));
        break;
      }
      if (r + 1 == config.max_rounds) {
        rec.decision = Decision::force_accept;
        trace.rounds.push_back(std::move(rec));
        std::size_t best = 0;
        for (std::size_t i = 1; i < trace.rounds.size(); ++i)
          if (trace.rounds[i].best_score > trace.rounds[best].best_score) best = i;
        const auto& br = trace.rounds[best];
        trace.final_candidate = br.candidates[br.best_index];
        break;
      }
      rec.decision = Decision::refine;
      const Candidate& top = rec.candidates[rec.best_index];
      const std::string best_text = top.payload.is_text() ? top.payload.text() : top.generation_prompt;
      trace.rounds.push_back(std::move(rec));
      g = refine_guidance(g, target, best_text, v.best_feedbacks, reasoner, p.text, p.seed, pe.store);
    }
  } catch (const SampleFailure&) {
    throw;
  } catch (const Error& e) {
    throw SampleFailure(e, std::move(trace), std::move(mining));
  }
  trace.validate(config.threshold, config.max_rounds);
  return {*trace.final_candidate, std::move(trace), std::move(mining)};
}

}  // namespace mb
