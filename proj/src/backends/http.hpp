#pragma once

#include <string>

#include <httplib.h>

namespace mb::detail {

struct HttpResult {
  int status = 0;
  std::string body;
};

// Issues one request against `endpoint` (scheme://host[:port][/prefix]).
// Connection problems and timeouts surface as TransientError; HTTP status
// codes are mapped by check_status.
HttpResult http_send(const std::string& endpoint, const std::string& method, const std::string& path,
                     const std::string& body, const httplib::Headers& headers, double timeout_seconds);

// 2xx passes. 429, 408 and 5xx are transient; 400 is invalid_params, 415
// unsupported_modality, anything else transport_error.
void check_status(const HttpResult& r, const std::string& who);

}  // namespace mb::detail
