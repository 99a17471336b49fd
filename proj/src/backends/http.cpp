#include "http.hpp"

#include <chrono>

#include "modbridge/error.hpp"

namespace mb::detail {

namespace {

struct SplitUrl {
  std::string base;
  std::string prefix;
};

SplitUrl split(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) fail(ErrorCode::invalid_params, "endpoint needs a scheme: " + endpoint);
  const auto slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, slash), prefix};
}

}  // namespace

HttpResult http_send(const std::string& endpoint, const std::string& method, const std::string& path,
                     const std::string& body, const httplib::Headers& headers, double timeout_seconds) {
  const auto url = split(endpoint);
  httplib::Client client(url.base);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const std::string full = url.prefix + path;
  httplib::Result res = method == "GET" ? client.Get(full, headers)
                                        : client.Post(full, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string what = endpoint + path + ": " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout)
      throw TransientError(ErrorCode::timeout, what);
    throw TransientError(ErrorCode::transport_error, what);
  }
  return {res->status, res->body};
}

void check_status(const HttpResult& r, const std::string& who) {
  if (r.status >= 200 && r.status < 300) return;
  const std::string what = who + ": HTTP " + std::to_string(r.status) + " " + r.body.substr(0, 200);
  if (r.status == 429) throw TransientError(ErrorCode::rate_limited, what);
  if (r.status == 408) throw TransientError(ErrorCode::timeout, what);
  if (r.status >= 500) throw TransientError(ErrorCode::transport_error, what);
  if (r.status == 400) fail(ErrorCode::invalid_params, what);
  if (r.status == 415) fail(ErrorCode::unsupported_modality, what);
  fail(ErrorCode::transport_error, what);
}

}  // namespace mb::detail
