#include "modbridge/agents/miner.hpp"

#include <optional>

#include "modbridge/error.hpp"
#include "modbridge/prompts/parse.hpp"
#include "modbridge/util/parallel.hpp"

namespace mb {

MiningRuleSet MiningRuleSet::restricted(const std::set<ModalityKind>& kinds) const {
  MiningRuleSet out{{}, reasoner_id, inferred_at};
  for (ModalityKind k : kinds) {
    auto it = questions.find(k);
    if (it == questions.end() || it->second.empty())
      fail(ErrorCode::invariant_violation, "no mining questions for " + std::string(to_string(k)));
    out.questions.emplace(k, it->second);
  }
  return out;
}

void MiningRuleSet::validate() const {
  for (const auto& [kind, list] : questions) {
    if (list.empty()) fail(ErrorCode::invariant_violation, "no questions for " + std::string(to_string(kind)));
    std::set<std::string> seen;
    for (const auto& q : list)
      if (q.empty() || !seen.insert(q).second)
        fail(ErrorCode::invariant_violation, "empty or repeated question for " + std::string(to_string(kind)));
  }
}

MiningRuleSet infer_rules(const std::string& domain_description, const std::set<ModalityKind>& available,
                          Backend& reasoner, const TextParams& params, std::uint64_t seed,
                          const BlobStore& store, const std::string& inferred_at) {
  require(!available.empty(), "infer_rules needs at least one modality");
  const std::string prompt = render("mining-rules", {{"domain_description", domain_description}});
  return ask_parsed(reasoner, prompt, {}, params, seed, store, 1,
                    "Reply with one JSON object mapping \"image\", \"text\" and \"audio\" to lists of "
                    "question strings.",
                    ErrorCode::malformed_rules, [&](const std::string& raw) {
                      MiningRuleSet all{parse_rules(raw), reasoner.id(), inferred_at};
                      for (ModalityKind k : available)
                        if (!all.questions.count(k))
                          fail(ErrorCode::schema_mismatch,
                               "reply has no questions for " + std::string(to_string(k)));
                      auto rules = all.restricted(available);
                      rules.validate();
                      return rules;
                    });
}

MiningRuleSet RuleCache::get(const std::string& dataset, const std::string& domain_description,
                             Backend& reasoner, const TextParams& params, std::uint64_t seed,
                             const BlobStore& store, const std::string& inferred_at) {
  // Held across inference so concurrent samples wait for one call.
  std::lock_guard lock(mu_);
  const auto key = std::make_pair(dataset, domain_description);
  auto it = rules_.find(key);
  if (it == rules_.end()) {
    const std::set<ModalityKind> all(kAllKinds.begin(), kAllKinds.end());
    it = rules_.emplace(key, infer_rules(domain_description, all, reasoner, params, seed, store, inferred_at))
             .first;
  }
  return it->second;
}

std::size_t RuleCache::size() const {
  std::lock_guard lock(mu_);
  return rules_.size();
}

MiningResult mine(const ModalityPayload& payload, const std::vector<std::string>& questions, Backend& miner,
                  const TextParams& params, std::uint64_t seed, const BlobStore& store, int fan_out) {
  require(!questions.empty(), "mine needs at least one question");
  const std::string head = render("mining-knowledge", {{"input-modality", std::string(to_string(payload.kind()))}});
  std::vector<std::optional<std::string>> answers(questions.size());
  std::vector<std::string> errors(questions.size());
  parallel_for(questions.size(), fan_out, [&](std::size_t i) {
    const std::string raw =
        miner.complete_text(head + "\n\n[QUESTION]: " + questions[i], {payload}, params, seed, store);
    try {
      answers[i] = parse_answer_line(raw);
    } catch (const Error& e) {
      if (!is_format_error(e)) throw;
      errors[i] = e.what();
    }
  });
  MiningResult out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (answers[i])
      out.pairs.push_back({questions[i], *answers[i]});
    else
      out.notes.push_back("dropped question \"" + questions[i] + "\": " + errors[i]);
  }
  if (out.pairs.empty())
    fail(ErrorCode::all_answers_failed, "no usable answer for any of " + std::to_string(questions.size()) +
                                            " " + std::string(to_string(payload.kind())) + " questions");
  return out;
}

std::string format_qa_pairs(const std::vector<QAPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    if (!out.empty()) out += "\n\n";
    out += "Q: " + p.question + "\nA: " + p.answer;
  }
  return out;
}

std::string summarize(const ModalityPayload& payload, const std::vector<QAPair>& pairs, Backend& lm,
                      const TextParams& params, std::uint64_t seed, const BlobStore& store) {
  require(!pairs.empty(), "summarize needs at least one QA pair");
  const std::string prompt = render("knowledge-summary", {{"input-modality", std::string(to_string(payload.kind()))},
                                                          {"qa_pairs", format_qa_pairs(pairs)}});
  return ask_parsed(lm, prompt, {payload}, params, seed, store, 1,
                    "Start the paragraph with the line marker [ANSWER]:", ErrorCode::malformed_summary,
                    [](const std::string& raw) { return parse_answer_line(raw); });
}

}  // namespace mb
