#include "modbridge/backends/blob_store.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "modbridge/core/validate.hpp"
#include "modbridge/error.hpp"
#include "modbridge/util/digest.hpp"

namespace mb {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string extension_for(const std::string& media_type) {
  if (media_type == "image/png") return ".png";
  if (media_type == "audio/wav" || media_type == "audio/x-wav") return ".wav";
  if (media_type == "image/jpeg") return ".jpg";
  if (media_type == "text/plain") return ".txt";
  return ".bin";
}

BlobStore::BlobStore(fs::path data_root, fs::path output_root)
    : data_root_(std::move(data_root)), output_root_(std::move(output_root)) {}

BlobStore::BlobStore(const BlobStore& parent)
    : parent_(&parent), data_root_(parent.data_root_), output_root_(parent.output_root_) {}

BlobRef BlobStore::put(std::string bytes, const std::string& media_type) {
  BlobRef ref{"blobs/" + sha256_hex(bytes) + extension_for(media_type), media_type, bytes.size()};
  std::lock_guard lock(mu_);
  memory_.emplace(ref.path, std::move(bytes));
  return ref;
}

const std::string* BlobStore::find_memory(const std::string& path) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(path); it != memory_.end()) return &it->second;
  }
  return parent_ ? parent_->find_memory(path) : nullptr;
}

std::string BlobStore::read(const BlobRef& ref) const {
  check_relative_path(ref.path);
  std::optional<std::string> bytes;
  if (const auto* m = find_memory(ref.path)) bytes = *m;
  if (!bytes && !output_root_.empty()) bytes = read_file(output_root_ / ref.path);
  if (!bytes && !data_root_.empty()) bytes = read_file(data_root_ / ref.path);
  if (!bytes) fail(ErrorCode::missing_blob, ref.path);
  if (bytes->size() != ref.byte_length)
    fail(ErrorCode::missing_blob, ref.path + ": length differs from reference");
  return *bytes;
}

std::string BlobStore::payload_bytes(const ModalityPayload& payload) const {
  return payload.is_text() ? payload.text() : read(payload.blob());
}

void BlobStore::persist(const BlobRef& ref) const {
  const auto* bytes = find_memory(ref.path);
  if (bytes == nullptr || output_root_.empty()) return;
  const fs::path target = output_root_ / ref.path;
  if (fs::exists(target) && fs::file_size(target) == bytes->size()) return;
  fs::create_directories(target.parent_path());
  // Concurrent samples may persist the same content; each writes its own temp file.
  const fs::path tmp =
      target.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(bytes->data(), static_cast<std::streamsize>(bytes->size()));
    if (!out) fail(ErrorCode::precondition_failed, "cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace mb
