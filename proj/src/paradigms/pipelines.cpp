#include "modbridge/paradigms/pipelines.hpp"

#include <algorithm>

#include "modbridge/error.hpp"
#include "modbridge/metrics/native.hpp"
#include "modbridge/prompts/parse.hpp"
#include "modbridge/util/parallel.hpp"

namespace mb {

std::string_view to_string(RankMethod m) { return m == RankMethod::judge ? "judge" : "embedding"; }

std::uint32_t best_of(const std::vector<double>& scores) {
  if (scores.empty()) fail(ErrorCode::empty_candidates, "nothing to rank");
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

Backend& generator_for(const VariantSpec& v, const PipelineEnv& env) {
  if (env.backends.has(v.generator_id)) return env.backends.get(v.generator_id);
  return env.backends.get(env.routing.generator_for(v.target_kind));
}

std::string text_request(std::string_view hint) {
  std::string r = "Describe the attached content in one or two plain sentences, as a caption would.";
  if (!hint.empty()) r += "\nUse these cues where they agree with the attachments: " + std::string(hint);
  return r;
}

std::string caption_request(ModalityKind source) {
  return "Describe the attached " + std::string(to_string(source)) +
         " in one detailed sentence that could serve as a generation prompt.";
}

namespace {

void require_missing(const Sample& sample, ModalityKind target) {
  require(!sample.has(target), "sample " + sample.id + " already has " + std::string(to_string(target)));
}

std::vector<ModalityPayload> accepted(const Backend& b, const std::vector<ModalityPayload>& payloads) {
  std::vector<ModalityPayload> out;
  for (const auto& p : payloads)
    if (b.descriptor().accepts(p.kind())) out.push_back(p);
  return out;
}

}  // namespace

Conditioning direct_conditioning(const Sample& sample, ModalityKind target, const PipelineEnv& env,
                                 const GenerationParams& params) {
  require_missing(sample, target);
  const auto observed = sample.observed();
  if (observed.empty()) fail(ErrorCode::no_usable_condition, "sample " + sample.id + " has no payloads");
  if (target == ModalityKind::text) return {text_request(), observed};
  if (const auto* text = sample.find(ModalityKind::text)) {
    if (!text->text().empty()) return {text->text(), {}};
  }
  for (const auto& p : observed) {
    if (p.is_text()) continue;
    Backend& captioner = env.backends.get(env.routing.captioner);
    if (!captioner.descriptor().accepts(p.kind())) continue;
    std::string caption =
        captioner.complete_text(caption_request(p.kind()), {p}, params.text, params.seed, env.store);
    if (!caption.empty()) return {std::move(caption), {}};
  }
  fail(ErrorCode::no_usable_condition, "sample " + sample.id + " has nothing to build a prompt from");
}

std::vector<Candidate> generate_candidates(Backend& generator, ModalityKind target,
                                           const std::vector<std::string>& prompts,
                                           const std::vector<ModalityPayload>& attachments,
                                           const GenerationParams& params, int count,
                                           std::uint64_t base_seed, BlobStore& store, int fan_out) {
  require(!prompts.empty(), "generate_candidates needs at least one prompt");
  require(count >= 1, "generate_candidates needs count >= 1");
  std::vector<ModalityPayload> usable;
  if (target == ModalityKind::text) {
    usable = accepted(generator, attachments);
    if (usable.empty() && !attachments.empty())
      fail(ErrorCode::no_usable_condition, generator.id() + " accepts none of the observed modalities");
  }
  auto one_batch = [&](const std::string& prompt, int n, std::uint64_t seed) {
    switch (target) {
      case ModalityKind::image: return generator.generate_image(prompt, params.image, n, seed, store);
      case ModalityKind::audio: return generator.generate_audio(prompt, params.audio, n, seed, store);
      case ModalityKind::text: break;
    }
    return generate_text(generator, prompt, usable, params.text, n, seed, store);
  };
  if (prompts.size() == 1) return one_batch(prompts.front(), count, base_seed);

  std::vector<Candidate> out(static_cast<std::size_t>(count),
                             Candidate{ModalityPayload::from_text(""), "", "", 0, 0});
  parallel_for(out.size(), fan_out, [&](std::size_t j) {
    auto c = one_batch(prompts[j % prompts.size()], 1, base_seed + j);
    out[j] = std::move(c.front());
    out[j].ordinal = static_cast<std::uint32_t>(j);
  });
  return out;
}

RankedOutcome rank_by_embedding(const std::vector<Candidate>& candidates,
                                const std::vector<ModalityPayload>& observed, Backend& embedder,
                                const BlobStore& store, int fan_out) {
  if (candidates.empty()) fail(ErrorCode::empty_candidates, "rank_by_embedding");
  require(!observed.empty(), "rank_by_embedding needs an observed payload");
  std::vector<EmbeddingVector> refs;
  for (const auto& o : observed) refs.push_back(embedder.embed(o, store));
  RankedOutcome out;
  out.method = RankMethod::embedding;
  out.scores.resize(candidates.size());
  parallel_for(candidates.size(), fan_out, [&](std::size_t i) {
    const auto e = embedder.embed(candidates[i].payload, store);
    double sum = 0.0;
    for (const auto& r : refs) sum += cosine_sim(e, r);
    out.scores[i] = sum / static_cast<double>(refs.size());
  });
  out.best_index = best_of(out.scores);
  return out;
}

RankedOutcome rank_by_judge(const std::vector<Candidate>& candidates, Backend& judge_backend,
                            const TextParams& params, std::uint64_t seed, const BlobStore& store,
                            int fan_out) {
  if (candidates.empty()) fail(ErrorCode::empty_candidates, "rank_by_judge");
  RankedOutcome out;
  out.method = RankMethod::judge;
  out.scores.resize(candidates.size());
  parallel_for(candidates.size(), fan_out, [&](std::size_t i) {
    const auto& c = candidates[i];
    std::vector<ModalityPayload> attachments;
    std::string shown;
    if (c.payload.is_text()) {
      shown = c.payload.text();
    } else {
      shown = "the attached " + std::string(to_string(c.payload.kind()));
      attachments.push_back(c.payload);
    }
    const std::string prompt =
        render("p2-judge-ranking", {{"prompt", c.generation_prompt}, {"generated_output", shown}});
    const auto scores =
        ask_parsed(judge_backend, prompt, attachments, params, seed, store, kJudgeReasks,
                   "Answer with the two score lines exactly as shown in the format above.",
                   ErrorCode::malformed_judgment, [](const std::string& raw) { return parse_ranking_scores(raw); });
    out.scores[i] = scores.final_score();
  });
  out.best_index = best_of(out.scores);
  return out;
}

RankedOutcome rank_candidates(const std::vector<Candidate>& candidates, const Sample& sample,
                              Ranker ranker, const GenerationParams& params, const PipelineEnv& env) {
  require(ranker != Ranker::none, "ranking needs a ranker");
  if (ranker == Ranker::embedding)
    return rank_by_embedding(candidates, sample.observed(), env.backends.get(env.routing.embedder),
                             env.store, env.fan_out);
  return rank_by_judge(candidates, env.backends.get(env.routing.judge), params.text, params.seed, env.store,
                       env.fan_out);
}

Candidate run_paradigm1(const Sample& sample, ModalityKind target, Backend& generator,
                        const GenerationParams& params, const PipelineEnv& env) {
  const auto cond = direct_conditioning(sample, target, env, params);
  auto batch = generate_candidates(generator, target, {cond.prompt}, cond.attachments, params, 1, params.seed,
                                   env.store, env.fan_out);
  return std::move(batch.front());
}

ParadigmResult run_paradigm2(const Sample& sample, ModalityKind target, const VariantSpec& variant,
                             const GenerationParams& params, const PipelineEnv& env) {
  require(variant.ranker != Ranker::none, "paradigm 2 needs a ranker");
  const auto cond = direct_conditioning(sample, target, env, params);
  ParadigmResult r{Candidate{ModalityPayload::from_text(""), "", "", 0, 0}, {}, std::nullopt, {}};
  r.candidates = generate_candidates(generator_for(variant, env), target, {cond.prompt}, cond.attachments,
                                     params, params.candidate_count, params.seed, env.store, env.fan_out);
  r.outcome = rank_candidates(r.candidates, sample, variant.ranker, params, env);
  r.winner = r.candidates[r.outcome->best_index];
  return r;
}

namespace {

constexpr int kMinerReasks = 1;

std::vector<std::string> mine_prompts(const Sample& sample, Miner miner, const GenerationParams& params,
                                      Granularity granularity, const PipelineEnv& env) {
  Backend& backend = env.backends.get(miner == Miner::strong_lmm ? env.routing.strong_miner
                                                                 : env.routing.local_miner);
  std::string prompt;
  std::vector<ModalityPayload> attachments;
  const auto* text = sample.find(ModalityKind::text);
  if (text && !text->text().empty()) {
    prompt = render("p3-text-miner", {{"text_info", text->text()}});
  } else {
    const ModalityPayload* media = sample.find(ModalityKind::image);
    if (!media) media = sample.find(ModalityKind::audio);
    if (!media) fail(ErrorCode::no_usable_condition, "sample " + sample.id + " has nothing to mine");
    prompt = render("p3-image-miner", {});
    attachments.push_back(*media);
  }
  prompt += granularity_suffix(granularity);
  return ask_parsed(backend, prompt, attachments, params.text, params.seed, env.store, kMinerReasks,
                    "Reply with a JSON object whose \"prompts\" list holds at least one prompt.",
                    ErrorCode::mined_prompts_empty, [](const std::string& raw) {
                      auto prompts = parse_mined_prompts(raw);
                      if (prompts.empty()) fail(ErrorCode::schema_mismatch, "miner returned no prompts");
                      return prompts;
                    });
}

}  // namespace

ParadigmResult run_paradigm3(const Sample& sample, ModalityKind target, const VariantSpec& variant,
                             const GenerationParams& params, Granularity granularity,
                             const PipelineEnv& env) {
  require(variant.miner != Miner::none, "paradigm 3 needs a miner");
  require(variant.ranker != Ranker::none, "paradigm 3 needs a ranker");
  require_missing(sample, target);
  ParadigmResult r{Candidate{ModalityPayload::from_text(""), "", "", 0, 0}, {}, std::nullopt, {}};
  r.mined_prompts = mine_prompts(sample, variant.miner, params, granularity, env);
  std::vector<std::string> prompts = r.mined_prompts;
  std::vector<ModalityPayload> attachments;
  if (target == ModalityKind::text) {
    for (auto& p : prompts) p = text_request(p);
    attachments = sample.observed();
  }
  r.candidates = generate_candidates(generator_for(variant, env), target, prompts, attachments, params,
                                     params.candidate_count, params.seed, env.store, env.fan_out);
  r.outcome = rank_candidates(r.candidates, sample, variant.ranker, params, env);
  r.winner = r.candidates[r.outcome->best_index];
  return r;
}

}  // namespace mb
