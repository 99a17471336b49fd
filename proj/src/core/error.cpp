#include "modbridge/error.hpp"

namespace mb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::precondition_failed: return "precondition_failed";
    case ErrorCode::missing_blob: return "missing_blob";
    case ErrorCode::path_escape: return "path_escape";
    case ErrorCode::empty_payloads: return "empty_payloads";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::schema_mismatch: return "schema_mismatch";
    case ErrorCode::invariant_violation: return "invariant_violation";
    case ErrorCode::unknown_template: return "unknown_template";
    case ErrorCode::missing_binding: return "missing_binding";
    case ErrorCode::extraneous_binding: return "extraneous_binding";
    case ErrorCode::marker_not_found: return "marker_not_found";
    case ErrorCode::no_json_found: return "no_json_found";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::transport_error: return "transport_error";
    case ErrorCode::rate_limited: return "rate_limited";
    case ErrorCode::unsupported_attachment: return "unsupported_attachment";
    case ErrorCode::unsupported_modality: return "unsupported_modality";
    case ErrorCode::unsupported_operation: return "unsupported_operation";
    case ErrorCode::invalid_params: return "invalid_params";
    case ErrorCode::malformed_judgment: return "malformed_judgment";
    case ErrorCode::sidecar_unavailable: return "sidecar_unavailable";
    case ErrorCode::range_violation: return "range_violation";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::empty_signal: return "empty_signal";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::no_usable_condition: return "no_usable_condition";
    case ErrorCode::empty_candidates: return "empty_candidates";
    case ErrorCode::mined_prompts_empty: return "mined_prompts_empty";
    case ErrorCode::malformed_rules: return "malformed_rules";
    case ErrorCode::all_answers_failed: return "all_answers_failed";
    case ErrorCode::malformed_summary: return "malformed_summary";
    case ErrorCode::insufficient_prompts: return "insufficient_prompts";
    case ErrorCode::malformed_refinement: return "malformed_refinement";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::schema_version_mismatch: return "schema_version_mismatch";
    case ErrorCode::fatal_config_error: return "fatal_config_error";
  }
  return "unknown";
}

}  // namespace mb
