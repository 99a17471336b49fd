#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "modbridge/core/types.hpp"

namespace mb {

enum class ExpectedOutput { json_object, answer_line, free_text };
std::string_view to_string(ExpectedOutput e);

struct PromptTemplate {
  std::string template_id;
  std::string body;
  std::set<std::string> required_placeholders;
  ExpectedOutput expected_output = ExpectedOutput::free_text;
};

using Bindings = std::map<std::string, std::string>;

// Bound to an absent modality's info placeholder.
inline constexpr std::string_view kNotAvailable = "not available";

// Placeholder names in body order, duplicates removed.
std::vector<std::string> placeholders_in(std::string_view body);

// The embedded templates. Immutable after first use.
const std::vector<PromptTemplate>& all_templates();
const PromptTemplate& get_template(std::string_view template_id);

// Single-pass substitution: binding values are never rescanned.
std::string render(std::string_view template_id, const Bindings& bindings);

// Template whose literal text before its first placeholder is the longest
// prefix of `prompt`.
std::optional<std::string> identify(std::string_view prompt);

// Text appended to a P3 miner prompt; empty for the baseline level.
std::string granularity_suffix(Granularity g);

// Writes <id>.txt per template; returns the number of files written.
std::size_t export_templates(const std::filesystem::path& dir);

}  // namespace mb
