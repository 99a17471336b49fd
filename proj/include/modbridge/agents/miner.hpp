#pragma once

#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "modbridge/backends/backend.hpp"

namespace mb {

// Questions to ask of each modality, as inferred by a reasoner.
struct MiningRuleSet {
  std::map<ModalityKind, std::vector<std::string>> questions;
  std::string reasoner_id;
  std::string inferred_at;

  // Copy holding only `kinds`. Throws invariant_violation if one is missing.
  MiningRuleSet restricted(const std::set<ModalityKind>& kinds) const;
  // Every listed kind has at least one question; questions are non-empty and
  // unique within a kind.
  void validate() const;
};

// Renders the rule template, parses the per-modality lists and keeps
// `available`. One re-ask, then malformed_rules.
MiningRuleSet infer_rules(const std::string& domain_description, const std::set<ModalityKind>& available,
                          Backend& reasoner, const TextParams& params, std::uint64_t seed,
                          const BlobStore& store, const std::string& inferred_at = {});

// Rule sets for all three kinds, inferred once per (dataset, domain).
class RuleCache {
 public:
  MiningRuleSet get(const std::string& dataset, const std::string& domain_description, Backend& reasoner,
                    const TextParams& params, std::uint64_t seed, const BlobStore& store,
                    const std::string& inferred_at = {});
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, MiningRuleSet> rules_;
};

struct QAPair {
  std::string question;
  std::string answer;
  bool operator==(const QAPair&) const = default;
};

struct MiningResult {
  std::vector<QAPair> pairs;
  // One note per dropped question.
  std::vector<std::string> notes;
};

// One call per question with the payload attached. Questions whose reply has
// no usable answer line are dropped and noted; if all are dropped the call
// fails with all_answers_failed.
MiningResult mine(const ModalityPayload& payload, const std::vector<std::string>& questions,
                  Backend& miner, const TextParams& params, std::uint64_t seed, const BlobStore& store,
                  int fan_out = 1);

// "Q: ...\nA: ..." blocks separated by blank lines.
std::string format_qa_pairs(const std::vector<QAPair>& pairs);

// One-paragraph summary of `payload` from its QA pairs. One re-ask, then
// malformed_summary.
std::string summarize(const ModalityPayload& payload, const std::vector<QAPair>& pairs, Backend& lm,
                      const TextParams& params, std::uint64_t seed, const BlobStore& store);

}  // namespace mb
