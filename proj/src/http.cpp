#include "hrkg/http.hpp"

#include <fstream>
#include <thread>

#include "hrkg/error.hpp"
#include "httplib.h"

namespace hrkg::http {

Endpoint Endpoint::parse(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("endpoint URL must start with http:// or https://: " + std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme '" + std::string(scheme) + "'");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.base = std::string(url.substr(0, path_start));
  e.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  if (e.base.size() <= scheme_end + 3) throw ConfigError("endpoint URL has no host: " + std::string(url));
  return e;
}

Response post_json(const Endpoint& endpoint, const std::string& body, const Headers& headers,
                   const RetryPolicy& policy) {
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(policy.timeout);
  client.set_read_timeout(policy.timeout);
  client.set_write_timeout(policy.timeout);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  std::string last_error;
  for (int attempt = 0; attempt <= policy.retry_max; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(policy.backoff_base * (1 << (attempt - 1)));
    auto res = client.Post(endpoint.path, h, body, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return Response{res->status, res->body, attempt + 1};
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status != 429 && res->status < 500) break;
  }
  throw NetworkError(endpoint.base + endpoint.path + ": " + last_error);
}

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {}

void AuditLog::append(const std::string& json_line) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(path_.string() + ": cannot open audit log");
  out << json_line << '\n';
}

}  // namespace hrkg::http
