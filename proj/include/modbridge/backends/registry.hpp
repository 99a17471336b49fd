#pragma once

#include <map>
#include <string>
#include <vector>

#include "modbridge/backends/backend.hpp"
#include "modbridge/backends/retry.hpp"

namespace mb {

BackendPtr make_backend(const BackendDescriptor& d, Sleeper sleeper = real_sleeper());

// Backends by id.
class BackendSet {
 public:
  BackendSet() = default;
  explicit BackendSet(const std::vector<BackendDescriptor>& descriptors);

  void add(BackendPtr backend);
  bool has(const std::string& id) const { return backends_.count(id) != 0; }
  // Throws fatal_config_error for unknown or empty ids.
  Backend& get(const std::string& id) const;
  std::vector<BackendDescriptor> descriptors() const;

 private:
  std::map<std::string, BackendPtr> backends_;
};

}  // namespace mb
