#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "modbridge/core/types.hpp"

namespace mb {

// Byte storage behind BlobRefs. New blobs live in memory under a
// content-addressed path ("blobs/<sha256>.<ext>") until persisted; reads fall
// back to the parent store, then the output root, then the data root.
class BlobStore {
 public:
  BlobStore(std::filesystem::path data_root, std::filesystem::path output_root = {});
  // Scratch store layered over `parent`; nothing is shared back until
  // persist() is called.
  explicit BlobStore(const BlobStore& parent);

  BlobStore& operator=(const BlobStore&) = delete;

  BlobRef put(std::string bytes, const std::string& media_type);
  std::string read(const BlobRef& ref) const;
  // Bytes that identify a payload: the text itself or the blob contents.
  std::string payload_bytes(const ModalityPayload& payload) const;
  // Writes an in-memory blob under output_root. No-op for blobs read from disk.
  void persist(const BlobRef& ref) const;

  const std::filesystem::path& data_root() const { return data_root_; }
  const std::filesystem::path& output_root() const { return output_root_; }

 private:
  const std::string* find_memory(const std::string& path) const;

  const BlobStore* parent_ = nullptr;
  std::filesystem::path data_root_;
  std::filesystem::path output_root_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> memory_;
};

std::string extension_for(const std::string& media_type);

}  // namespace mb
