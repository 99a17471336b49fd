#include "modbridge/core/validate.hpp"

#include <system_error>

#include "modbridge/error.hpp"

namespace mb {

namespace fs = std::filesystem;

void check_relative_path(const std::string& path) {
  if (path.empty()) fail(ErrorCode::path_escape, "empty blob path");
  const fs::path p(path);
  if (p.is_absolute() || p.has_root_name() || p.has_root_directory())
    fail(ErrorCode::path_escape, "absolute blob path '" + path + "'");
  for (const auto& part : p)
    if (part == "..") fail(ErrorCode::path_escape, "parent traversal in '" + path + "'");
}

const Sample& validate_sample(const Sample& sample, const fs::path& data_root) {
  require(fs::is_directory(data_root), "data root '" + data_root.string() + "' is not a directory");
  if (sample.id.empty()) fail(ErrorCode::validation_error, "sample id is empty");
  if (sample.payloads.empty()) fail(ErrorCode::empty_payloads, "sample '" + sample.id + "'");
  for (const auto& [kind, payload] : sample.payloads) {
    if (payload.kind() != kind)
      fail(ErrorCode::invariant_violation, "payload filed under the wrong kind in '" + sample.id + "'");
    if (payload.is_text()) continue;
    const auto& ref = payload.blob();
    check_relative_path(ref.path);
    const fs::path full = data_root / ref.path;
    std::error_code ec;
    const auto size = fs::file_size(full, ec);
    if (ec || !fs::is_regular_file(full))
      fail(ErrorCode::missing_blob, "'" + ref.path + "' in sample '" + sample.id + "'");
    if (size != ref.byte_length)
      fail(ErrorCode::missing_blob, "'" + ref.path + "' has " + std::to_string(size) +
                                        " bytes, declared " + std::to_string(ref.byte_length));
  }
  return sample;
}

}  // namespace mb
