#pragma once

// Canonical JSON encoding of the core types. Field names are snake_case and
// decoders reject unknown fields.

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "modbridge/core/types.hpp"

namespace mb {

using json = nlohmann::json;

// Throws schema_mismatch if `j` is not an object or carries a key outside
// `allowed`.
void check_fields(const json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view type_name);

[[noreturn]] void schema_error(std::string_view type_name, std::string_view what);

// Typed field access that reports schema_mismatch instead of nlohmann errors.
template <typename T>
T field(const json& j, std::string_view key, std::string_view type_name) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(type_name, "missing field '" + std::string(key) + "'");
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned())
        schema_error(type_name, "field '" + std::string(key) + "' must be a non-negative integer");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer())
        schema_error(type_name, "field '" + std::string(key) + "' must be an integer");
    }
    return it->template get<T>();
  } catch (const json::exception& e) {
    schema_error(type_name, "field '" + std::string(key) + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& j, std::string_view key, T fallback, std::string_view type_name) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return field<T>(j, key, type_name);
}

json to_json(ModalityKind k);
json to_json(const BlobRef& b);
json to_json(const ModalityPayload& p);
json to_json(const Sample& s);
json to_json(const MissingMask& m);
json to_json(const VariantSpec& v);
json to_json(const GenerationParams& p);
json to_json(const Candidate& c);
json to_json(const JudgeReport& r);
json to_json(const Routing& r);
json to_json(const PipelineConfig& c);
json to_json(const RoundRecord& r);
json to_json(const RefinementTrace& t);

template <typename T>
T from_json(const json& j);

template <> BlobRef from_json<BlobRef>(const json& j);
template <> ModalityPayload from_json<ModalityPayload>(const json& j);
template <> Sample from_json<Sample>(const json& j);
template <> MissingMask from_json<MissingMask>(const json& j);
template <> VariantSpec from_json<VariantSpec>(const json& j);
template <> GenerationParams from_json<GenerationParams>(const json& j);
template <> Candidate from_json<Candidate>(const json& j);
template <> JudgeReport from_json<JudgeReport>(const json& j);
template <> Routing from_json<Routing>(const json& j);
template <> PipelineConfig from_json<PipelineConfig>(const json& j);
template <> RoundRecord from_json<RoundRecord>(const json& j);
template <> RefinementTrace from_json<RefinementTrace>(const json& j);

}  // namespace mb
