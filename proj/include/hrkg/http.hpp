#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hrkg::http {

/// "scheme://host[:port]" plus request path, split from a full URL.
struct Endpoint {
  std::string base;
  std::string path;

  static Endpoint parse(std::string_view url);
};

struct RetryPolicy {
  int retry_max = 3;
  std::chrono::milliseconds backoff_base{200};
  std::chrono::seconds timeout{60};
};

struct Response {
  int status = 0;
  std::string body;
  int attempts = 0;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POSTs a JSON body. Connection failures, 429 and 5xx are retried up to
/// retry_max times, sleeping backoff_base * 2^attempt between tries. Other
/// 4xx and exhausted retries throw NetworkError.
Response post_json(const Endpoint& endpoint, const std::string& body, const Headers& headers,
                   const RetryPolicy& policy);

/// Append-only JSONL sink shared across worker threads.
class AuditLog {
 public:
  explicit AuditLog(std::filesystem::path path);

  void append(const std::string& json_line);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

}  // namespace hrkg::http
