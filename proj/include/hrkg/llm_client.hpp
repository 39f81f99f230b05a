#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrkg/corpus.hpp"
#include "hrkg/error.hpp"
#include "hrkg/extraction.hpp"
#include "hrkg/http.hpp"

namespace hrkg {

struct LlmClientConfig {
  /// Full chat-completion URL, e.g. http://localhost:8080/v1/chat/completions.
  std::string endpoint;
  std::string model;
  /// Environment variable holding the API key; must be set.
  std::string api_key_env = "HRKG_LLM_API_KEY";
  double temperature = 0.0;
  http::RetryPolicy retry;
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> audit_path;
};

/// Reply that could not be parsed; keeps the raw text for audit.
class ExtractionParseError : public ParseError {
 public:
  ExtractionParseError(std::string doc_id, std::string raw_reply, const std::string& what)
      : ParseError(what), doc_id_(std::move(doc_id)), raw_reply_(std::move(raw_reply)) {}

  const std::string& doc_id() const { return doc_id_; }
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string doc_id_;
  std::string raw_reply_;
};

class LlmClient {
 public:
  /// Validates the endpoint and reads the key from the environment; throws
  /// ConfigError before any network traffic when either is missing.
  explicit LlmClient(LlmClientConfig config);

  const LlmClientConfig& config() const { return config_; }

  /// Request body: {"model", "messages": [{"role": "user", ...}], "temperature"}.
  std::string request_body(const std::string& prompt) const;

  /// Sends one prompt and returns the assistant text of the reply.
  std::string complete(const std::string& prompt, const std::string& doc_id) const;

 private:
  LlmClientConfig config_;
  http::Endpoint endpoint_;
  std::string api_key_;
  std::shared_ptr<http::AuditLog> audit_;
};

/// Pulls the assistant text from an OpenAI-style body
/// (choices[0].message.content), a bare {"content": ...}, or returns the
/// body unchanged.
std::string reply_text(const std::string& body);

RawEntitySet extract_llm(const Document& doc, const LlmClient& client);

struct BatchExtraction {
  /// Same order as the input documents; empty where extraction failed.
  std::vector<std::optional<RawEntitySet>> results;
  /// (doc_id, error message) for each failure.
  std::vector<std::pair<std::string, std::string>> failures;
};

/// Runs extract_llm over `docs` with at most config.max_in_flight requests
/// in flight.
BatchExtraction extract_llm_batch(const std::vector<Document>& docs, const LlmClient& client);

}  // namespace hrkg
