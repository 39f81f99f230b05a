#include "hrkg/llm_client.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace hrkg {

using nlohmann::ordered_json;

LlmClient::LlmClient(LlmClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("LLM endpoint is not configured");
  endpoint_ = http::Endpoint::parse(config_.endpoint);
  if (config_.api_key_env.empty()) throw ConfigError("LLM key environment variable name is empty");
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
  if (config_.audit_path) audit_ = std::make_shared<http::AuditLog>(*config_.audit_path);
}

std::string LlmClient::request_body(const std::string& prompt) const {
  ordered_json j;
  j["model"] = config_.model;
  j["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", prompt}}});
  j["temperature"] = config_.temperature;
  return j.dump();
}

std::string reply_text(const std::string& body) {
  ordered_json j;
  try {
    j = ordered_json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return body;
  }
  if (j.is_object()) {
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const auto& c = j["choices"][0];
      if (c.contains("message") && c["message"].contains("content") &&
          c["message"]["content"].is_string()) {
        return c["message"]["content"].get<std::string>();
      }
      if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    }
    if (j.contains("content") && j["content"].is_string()) return j["content"].get<std::string>();
  }
  return body;
}

std::string LlmClient::complete(const std::string& prompt, const std::string& doc_id) const {
  const std::string body = request_body(prompt);
  const http::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  ordered_json audit;
  audit["doc_id"] = doc_id;
  audit["endpoint"] = config_.endpoint;
  audit["request"] = ordered_json::parse(body);
  try {
    const auto res = http::post_json(endpoint_, body, headers, config_.retry);
    if (audit_) {
      audit["status"] = res.status;
      audit["attempts"] = res.attempts;
      audit["response"] = res.body;
      audit_->append(audit.dump());
    }
    return reply_text(res.body);
  } catch (const NetworkError& e) {
    if (audit_) {
      audit["error"] = e.what();
      audit_->append(audit.dump());
    }
    throw NetworkError("document '" + doc_id + "': " + e.what());
  }
}

RawEntitySet extract_llm(const Document& doc, const LlmClient& client) {
  const std::string reply = client.complete(build_prompt(doc), doc.id);
  try {
    return parse_llm_response(reply, doc.id);
  } catch (const ParseError& e) {
    throw ExtractionParseError(doc.id, reply, e.what());
  }
}

BatchExtraction extract_llm_batch(const std::vector<Document>& docs, const LlmClient& client) {
  BatchExtraction out;
  out.results.resize(docs.size());
  std::vector<std::optional<std::string>> errors(docs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      try {
        out.results[i] = extract_llm(docs[i], client);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(client.config().max_in_flight, docs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (errors[i]) out.failures.emplace_back(docs[i].id, *errors[i]);
  }
  return out;
}

}  // namespace hrkg
