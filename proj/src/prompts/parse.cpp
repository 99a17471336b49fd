#include "modbridge/prompts/parse.hpp"

#include <regex>
#include <set>
#include <sstream>

#include "modbridge/error.hpp"
#include "modbridge/util/text.hpp"

namespace mb {

namespace {

constexpr std::string_view kAnswerMarker = "[ANSWER]:";

// Index one past the brace matching s[open], or npos.
std::size_t match_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"')
      in_string = true;
    else if (c == '{')
      ++depth;
    else if (c == '}' && --depth == 0)
      return i + 1;
  }
  return std::string_view::npos;
}

std::string drop_trailing_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false, escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::optional<json> try_parse_object(std::string_view text) {
  for (const std::string& candidate : {std::string(text), drop_trailing_commas(text)}) {
    json j = json::parse(candidate, nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  return std::nullopt;
}

std::string strip_fences(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string out, line;
  while (std::getline(in, line))
    if (trim(line).rfind("```", 0) != 0) out += line + '\n';
  return out;
}

std::uint32_t count_field(const json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) schema_error("judge report", std::string("missing '") + key + "'");
    return 0;
  }
  if (!it->is_number_unsigned() || it->get<std::uint64_t>() > UINT32_MAX)
    schema_error("judge report", std::string("'") + key + "' must be a non-negative integer");
  return it->get<std::uint32_t>();
}

}  // namespace

std::string parse_answer_line(std::string_view raw) {
  const auto at = raw.find(kAnswerMarker);
  if (at == std::string_view::npos) fail(ErrorCode::marker_not_found, "no [ANSWER]: marker");
  std::string answer = collapse_whitespace(raw.substr(at + kAnswerMarker.size()));
  if (answer.empty()) fail(ErrorCode::marker_not_found, "empty answer after marker");
  return answer;
}

json extract_json_object(std::string_view raw) {
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const std::size_t end = match_brace(raw, open);
    if (end == std::string_view::npos) continue;
    if (auto j = try_parse_object(raw.substr(open, end - open))) return *j;
  }
  fail(ErrorCode::no_json_found, "no JSON object in model output");
}

std::vector<std::string> parse_candidates_json(std::string_view raw, CandidateField field) {
  const json obj = extract_json_object(raw);
  const char* key = field == CandidateField::text ? "text" : "prompts";
  auto it = obj.find("candidates");
  if (it == obj.end() || !it->is_array()) schema_error("candidates", "missing 'candidates' array");
  std::vector<std::string> out;
  for (const auto& entry : *it) {
    if (!entry.is_object()) schema_error("candidates", "entries must be objects");
    auto v = entry.find(key);
    if (v == entry.end() || !v->is_string())
      schema_error("candidates", std::string("entry lacks string field '") + key + "'");
    std::string s = trim(v->get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

JudgeReport parse_judge_report(std::string_view raw, ModalityKind kind) {
  const json obj = extract_json_object(raw);
  JudgeReport::Criteria criteria;
  for (auto name : criterion_names(kind)) {
    auto it = obj.find(name);
    if (it == obj.end()) schema_error("judge report", "missing criterion '" + std::string(name) + "'");
    if (!it->is_number()) schema_error("judge report", "criterion '" + std::string(name) + "' is not a number");
    criteria.emplace_back(std::string(name), it->get<double>());
  }

  std::uint32_t hallucinated = 0;
  if (kind == ModalityKind::image) {
    auto it = obj.find("hallucinated_elements");
    if (it == obj.end() || !it->is_array())
      schema_error("judge report", "missing 'hallucinated_elements' list");
    for (const auto& e : *it)
      if (!e.is_string()) schema_error("judge report", "hallucinated elements must be strings");
    hallucinated = static_cast<std::uint32_t>(it->size());
  } else {
    hallucinated = count_field(obj, "hallucinated_assertions", true);
  }
  const std::uint32_t total = count_field(obj, "total_assertions", false);
  const std::uint32_t noise = kind == ModalityKind::audio ? count_field(obj, "noise_segments", false) : 0;

  std::map<std::string, std::string> justifications;
  if (auto it = obj.find("justifications"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) schema_error("judge report", "'justifications' must be an object");
    for (const auto& item : it->items()) {
      if (!item.value().is_string()) schema_error("judge report", "justifications must be strings");
      justifications.emplace(item.key(), item.value().get<std::string>());
    }
  }
  return JudgeReport::make(kind, std::move(criteria), hallucinated, total, noise,
                           std::move(justifications));
}

RankingScores parse_ranking_scores(std::string_view raw) {
  static const std::regex accuracy(
      R"(matching\s+accuracy(?:\s*\([^)]*\))?\s*\**\s*[:=]\s*\**\s*([0-9]+(?:\.[0-9]+)?))",
      std::regex::icase);
  static const std::regex relevance(
      R"(semantic\s+relevance(?:\s*\([^)]*\))?\s*\**\s*[:=]\s*\**\s*([0-9]+(?:\.[0-9]+)?))",
      std::regex::icase);
  const std::string s(raw);
  std::smatch ma, mr;
  if (!std::regex_search(s, ma, accuracy) || !std::regex_search(s, mr, relevance))
    schema_error("ranking reply", "missing Matching Accuracy or Semantic Relevance score");
  RankingScores r{std::stod(ma[1].str()), std::stod(mr[1].str())};
  if (r.accuracy > 5.0 || r.relevance > 5.0)
    fail(ErrorCode::invariant_violation, "ranking score outside [0,5]");
  return r;
}

std::vector<std::string> parse_mined_prompts(std::string_view raw) {
  const json obj = extract_json_object(raw);
  std::vector<std::string> out;
  auto push = [&](const json& v) {
    if (!v.is_string()) schema_error("mined prompts", "prompts must be strings");
    std::string s = trim(v.get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
  };
  if (auto it = obj.find("prompts"); it != obj.end() && it->is_array()) {
    for (const auto& v : *it) push(v);
    return out;
  }
  if (auto it = obj.find("candidates"); it != obj.end() && it->is_array()) {
    for (const auto& v : *it) {
      if (v.is_object() && v.contains("prompts"))
        push(v.at("prompts"));
      else if (v.is_object() && v.contains("text"))
        push(v.at("text"));
      else
        push(v);
    }
    return out;
  }
  schema_error("mined prompts", "expected a 'prompts' or 'candidates' list");
}

std::map<ModalityKind, std::vector<std::string>> parse_rules(std::string_view raw) {
  json obj;
  try {
    obj = extract_json_object(raw);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_json_found) throw;
    // The reasoner sometimes returns the object body without its braces.
    obj = extract_json_object("{" + strip_fences(raw) + "}");
  }
  std::map<ModalityKind, std::vector<std::string>> rules;
  for (auto kind : kAllKinds) {
    auto it = obj.find(to_string(kind));
    if (it == obj.end()) continue;
    if (!it->is_array()) schema_error("mining rules", std::string(to_string(kind)) + " must be a list");
    std::vector<std::string> questions;
    std::set<std::string> seen;
    for (const auto& q : *it) {
      if (!q.is_string()) schema_error("mining rules", "questions must be strings");
      std::string s = collapse_whitespace(q.get<std::string>());
      if (!s.empty() && seen.insert(s).second) questions.push_back(std::move(s));
    }
    if (!questions.empty()) rules.emplace(kind, std::move(questions));
  }
  if (rules.empty()) schema_error("mining rules", "no modality question lists");
  return rules;
}

}  // namespace mb
