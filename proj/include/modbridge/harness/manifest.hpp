#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "modbridge/core/types.hpp"

namespace mb {

struct Manifest {
  std::string dataset_name;
  std::filesystem::path data_root;
  std::vector<Sample> samples;

  const Sample& get(const std::string& id) const;
};

// Line-delimited JSON, one {id, image, text, audio, labels} record per line.
// image and audio are paths relative to data_root (or {path, media_type}
// objects); null or missing fields mean the modality is absent. Blank lines
// are skipped. data_root defaults to the manifest's directory and the
// dataset name to its file stem.
// Throws parse_error (message starts "line N") or validation_error (names the
// sample).
Manifest load_manifest(const std::filesystem::path& path, std::filesystem::path data_root = {});

// Writes the manifest back in load_manifest's format.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Chooses round(rate * eligible) samples that have `target` by seeded
// sampling without replacement. masked_ids keep manifest order.
MissingMask apply_missing_mask(const Manifest& manifest, ModalityKind target, double rate,
                               std::uint64_t seed);

}  // namespace mb
