#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mb {

// Every failure the library raises carries one of these codes. Per-sample
// errors end up in results files under their snake_case name.
enum class ErrorCode {
  precondition_failed,
  // core
  missing_blob,
  path_escape,
  empty_payloads,
  validation_error,
  schema_mismatch,
  invariant_violation,
  // prompts
  unknown_template,
  missing_binding,
  extraneous_binding,
  marker_not_found,
  no_json_found,
  // backends
  timeout,
  transport_error,
  rate_limited,
  unsupported_attachment,
  unsupported_modality,
  unsupported_operation,
  invalid_params,
  malformed_judgment,
  // metrics
  sidecar_unavailable,
  range_violation,
  length_mismatch,
  empty_signal,
  dimension_mismatch,
  // paradigms
  no_usable_condition,
  empty_candidates,
  mined_prompts_empty,
  // agents
  malformed_rules,
  all_answers_failed,
  malformed_summary,
  insufficient_prompts,
  malformed_refinement,
  // harness
  parse_error,
  schema_version_mismatch,
  fatal_config_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Transport failures that a retry loop may try again.
class TransientError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::precondition_failed, message);
}

}  // namespace mb
