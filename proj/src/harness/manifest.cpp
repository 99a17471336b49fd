#include "modbridge/harness/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "modbridge/core/json.hpp"
#include "modbridge/core/validate.hpp"
#include "modbridge/error.hpp"
#include "modbridge/util/rng.hpp"

namespace mb {

namespace fs = std::filesystem;

const Sample& Manifest::get(const std::string& id) const {
  for (const auto& s : samples)
    if (s.id == id) return s;
  fail(ErrorCode::precondition_failed, "no sample '" + id + "' in " + dataset_name);
}

namespace {

std::string media_type_for(ModalityKind kind, const std::string& path) {
  const auto ext = fs::path(path).extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".wav") return "audio/wav";
  return kind == ModalityKind::image ? "image/png" : "audio/wav";
}

ModalityPayload blob_payload(ModalityKind kind, const json& v, const fs::path& root, const std::string& id) {
  BlobRef ref;
  if (v.is_string()) {
    ref.path = v.get<std::string>();
    ref.media_type = media_type_for(kind, ref.path);
  } else if (v.is_object() && v.contains("path") && v.at("path").is_string()) {
    ref.path = v.at("path").get<std::string>();
    ref.media_type = v.contains("media_type") && v.at("media_type").is_string()
                         ? v.at("media_type").get<std::string>()
                         : media_type_for(kind, ref.path);
  } else {
    fail(ErrorCode::validation_error, "sample " + id + ": " + std::string(to_string(kind)) +
                                          " must be a path or {path, media_type}");
  }
  check_relative_path(ref.path);
  std::error_code ec;
  const auto size = fs::file_size(root / ref.path, ec);
  if (ec) fail(ErrorCode::missing_blob, ref.path);
  ref.byte_length = size;
  return ModalityPayload::from_blob(kind, std::move(ref));
}

Sample parse_record(const json& j, const fs::path& root) {
  if (!j.is_object()) fail(ErrorCode::validation_error, "record is not an object");
  Sample s;
  if (!j.contains("id") || !j.at("id").is_string()) fail(ErrorCode::validation_error, "record without a string id");
  s.id = j.at("id").get<std::string>();
  for (const auto& [key, value] : j.items())
    if (key != "id" && key != "image" && key != "text" && key != "audio" && key != "labels")
      fail(ErrorCode::validation_error, "sample " + s.id + ": unknown field '" + key + "'");
  try {
    if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) fail(ErrorCode::validation_error, "text must be a string");
      s.payloads.emplace(ModalityKind::text, ModalityPayload::from_text(it->get<std::string>()));
    }
    for (ModalityKind k : {ModalityKind::image, ModalityKind::audio})
      if (auto it = j.find(to_string(k)); it != j.end() && !it->is_null())
        s.payloads.emplace(k, blob_payload(k, *it, root, s.id));
    if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) fail(ErrorCode::validation_error, "labels must be a list");
      std::vector<std::string> labels;
      for (const auto& l : *it) {
        if (!l.is_string()) fail(ErrorCode::validation_error, "labels must be strings");
        labels.push_back(l.get<std::string>());
      }
      s.labels = std::move(labels);
    }
    validate_sample(s, root);
  } catch (const Error& e) {
    fail(ErrorCode::validation_error, "sample " + s.id + ": " + e.what());
  }
  return s;
}

}  // namespace

Manifest load_manifest(const fs::path& path, fs::path data_root) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open manifest " + path.string());
  Manifest m;
  m.dataset_name = path.stem().string();
  m.data_root = data_root.empty() ? path.parent_path() : std::move(data_root);
  if (m.data_root.empty()) m.data_root = ".";
  std::set<std::string> ids;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
    Sample s = parse_record(j, m.data_root);
    if (!ids.insert(s.id).second) fail(ErrorCode::validation_error, "sample " + s.id + ": duplicate id");
    m.samples.push_back(std::move(s));
  }
  return m;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path.string());
  for (const auto& s : manifest.samples) {
    json j = {{"id", s.id}};
    for (ModalityKind k : kAllKinds) {
      const auto* p = s.find(k);
      if (!p)
        j[std::string(to_string(k))] = nullptr;
      else if (p->is_text())
        j[std::string(to_string(k))] = p->text();
      else
        j[std::string(to_string(k))] = p->blob().path;
    }
    j["labels"] = s.labels ? json(*s.labels) : json(nullptr);
    out << j.dump() << '\n';
  }
}

MissingMask apply_missing_mask(const Manifest& manifest, ModalityKind target, double rate, std::uint64_t seed) {
  require(rate >= 0.0 && rate <= 1.0, "missing rate must lie in [0, 1]");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i)
    if (manifest.samples[i].has(target)) eligible.push_back(i);
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(eligible.size())));
  // Partial Fisher-Yates over the eligible positions.
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  std::vector<std::size_t> chosen(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());
  MissingMask mask{target, rate, seed, eligible.size(), {}};
  for (auto i : chosen) mask.masked_ids.push_back(manifest.samples[i].id);
  return mask;
}

}  // namespace mb
