#include "modbridge/prompts/library.hpp"

#include <fstream>
#include <regex>

#include "modbridge/error.hpp"

namespace mb {

namespace {

#include "templates.inc"

const std::regex& placeholder_re() {
  static const std::regex re(R"(\{([A-Za-z_][A-Za-z0-9_\-]*)\})");
  return re;
}

PromptTemplate make(std::string id, std::string_view body, ExpectedOutput out) {
  PromptTemplate t{std::move(id), std::string(body), {}, out};
  for (auto& name : placeholders_in(t.body)) t.required_placeholders.insert(std::move(name));
  return t;
}

std::size_t literal_prefix_length(const std::string& body) {
  std::smatch m;
  if (std::regex_search(body, m, placeholder_re())) return static_cast<std::size_t>(m.position(0));
  return body.size();
}

}  // namespace

std::string_view to_string(ExpectedOutput e) {
  switch (e) {
    case ExpectedOutput::json_object: return "json_object";
    case ExpectedOutput::answer_line: return "answer_line";
    case ExpectedOutput::free_text: return "free_text";
  }
  return "free_text";
}

std::vector<std::string> placeholders_in(std::string_view body) {
  std::vector<std::string> names;
  const std::string s(body);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), placeholder_re()); it != std::sregex_iterator();
       ++it) {
    std::string name = (*it)[1].str();
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
  }
  return names;
}

const std::vector<PromptTemplate>& all_templates() {
  using E = ExpectedOutput;
  static const std::vector<PromptTemplate> templates = {
      make("mining-rules", kMiningRules, E::json_object),
      make("mining-knowledge", kMiningKnowledge, E::answer_line),
      make("knowledge-summary", kKnowledgeSummary, E::answer_line),
      make("gen-text", kGenText, E::json_object),
      make("gen-image", kGenImage, E::json_object),
      make("gen-audio", kGenAudio, E::json_object),
      make("verify-text", kVerifyText, E::json_object),
      make("verify-image", kVerifyImage, E::json_object),
      make("verify-audio", kVerifyAudio, E::json_object),
      make("refine-text", kRefineText, E::free_text),
      make("refine-image", kRefineImage, E::free_text),
      make("refine-audio", kRefineAudio, E::free_text),
      make("p2-judge-ranking", kP2JudgeRanking, E::free_text),
      make("p3-text-miner", kP3TextMiner, E::json_object),
      make("p3-image-miner", kP3ImageMiner, E::json_object),
      make("granularity-suffix", kGranularitySuffix, E::free_text),
  };
  return templates;
}

const PromptTemplate& get_template(std::string_view template_id) {
  for (const auto& t : all_templates())
    if (t.template_id == template_id) return t;
  fail(ErrorCode::unknown_template, std::string(template_id));
}

std::string render(std::string_view template_id, const Bindings& bindings) {
  const auto& t = get_template(template_id);
  for (const auto& [name, value] : bindings)
    if (t.required_placeholders.count(name) == 0)
      fail(ErrorCode::extraneous_binding, name + " (template " + t.template_id + ")");
  for (const auto& name : t.required_placeholders)
    if (bindings.count(name) == 0)
      fail(ErrorCode::missing_binding, name + " (template " + t.template_id + ")");

  std::string out;
  out.reserve(t.body.size());
  auto last = t.body.cbegin();
  for (auto it = std::sregex_iterator(t.body.begin(), t.body.end(), placeholder_re());
       it != std::sregex_iterator(); ++it) {
    out.append(last, (*it)[0].first);
    out.append(bindings.at((*it)[1].str()));
    last = (*it)[0].second;
  }
  out.append(last, t.body.cend());
  return out;
}

std::optional<std::string> identify(std::string_view prompt) {
  std::optional<std::string> best;
  std::size_t best_len = 0;
  for (const auto& t : all_templates()) {
    const std::size_t n = literal_prefix_length(t.body);
    if (n == 0 || n <= best_len || prompt.size() < n) continue;
    if (prompt.compare(0, n, t.body, 0, n) == 0) {
      best = t.template_id;
      best_len = n;
    }
  }
  return best;
}

std::string granularity_suffix(Granularity g) {
  switch (g) {
    case Granularity::baseline: return {};
    case Granularity::object: return render("granularity-suffix", {{"focus", "the main objects"}});
    case Granularity::object_location:
      return render("granularity-suffix",
                    {{"focus", "the main objects and their spatial locations"}});
    case Granularity::object_color:
      return render("granularity-suffix", {{"focus", "the main objects and their colors"}});
  }
  return {};
}

std::size_t export_templates(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : all_templates()) {
    std::ofstream out(dir / (t.template_id + ".txt"), std::ios::binary);
    out << t.body;
    if (!out) fail(ErrorCode::precondition_failed, "cannot write " + (dir / t.template_id).string());
  }
  return all_templates().size();
}

}  // namespace mb
