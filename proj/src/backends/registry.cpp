#include "modbridge/backends/registry.hpp"

#include "modbridge/backends/mock.hpp"
#include "modbridge/backends/remote_chat.hpp"
#include "modbridge/backends/sidecar.hpp"

namespace mb {

BackendPtr make_backend(const BackendDescriptor& d, Sleeper sleeper) {
  switch (d.transport) {
    case Transport::mock: return std::make_shared<MockBackend>(d);
    case Transport::remote_chat: return std::make_shared<RemoteChatBackend>(d, std::move(sleeper));
    case Transport::sidecar: return std::make_shared<SidecarBackend>(d, std::move(sleeper));
  }
  fail(ErrorCode::fatal_config_error, "unknown transport");
}

BackendSet::BackendSet(const std::vector<BackendDescriptor>& descriptors) {
  for (const auto& d : descriptors) add(make_backend(d));
}

void BackendSet::add(BackendPtr backend) {
  const std::string id = backend->id();
  if (!backends_.emplace(id, std::move(backend)).second)
    fail(ErrorCode::fatal_config_error, "duplicate backend id '" + id + "'");
}

Backend& BackendSet::get(const std::string& id) const {
  auto it = backends_.find(id);
  if (it == backends_.end())
    fail(ErrorCode::fatal_config_error, id.empty() ? "no backend routed for this role"
                                                   : "unknown backend '" + id + "'");
  return *it->second;
}

std::vector<BackendDescriptor> BackendSet::descriptors() const {
  std::vector<BackendDescriptor> out;
  for (const auto& [id, b] : backends_) out.push_back(b->descriptor());
  return out;
}

}  // namespace mb
