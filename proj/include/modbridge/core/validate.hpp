#pragma once

#include <filesystem>

#include "modbridge/core/types.hpp"

namespace mb {

// Rejects absolute paths, root names and any ".." component.
void check_relative_path(const std::string& path);

// Returns the sample unchanged when it is well formed and every blob resolves
// under data_root to a readable file of the declared length.
const Sample& validate_sample(const Sample& sample, const std::filesystem::path& data_root);

}  // namespace mb
