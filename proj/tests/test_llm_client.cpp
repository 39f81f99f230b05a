#include <doctest.h>

#include <cstdlib>

#include "hrkg/error.hpp"
#include "hrkg/llm_client.hpp"
#include "json.hpp"
#include "mock_server.hpp"
#include "support.hpp"

using namespace hrkg;

namespace {

constexpr const char* kKeyEnv = "HRKG_TEST_LLM_KEY";

std::string chat_reply(const std::string& content) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return j.dump();
}

LlmClientConfig config_for(const testsupport::MockServer& server) {
  LlmClientConfig c;
  c.endpoint = server.url("/v1/chat/completions");
  c.model = "test-model";
  c.api_key_env = kKeyEnv;
  c.retry.retry_max = 3;
  c.retry.backoff_base = std::chrono::milliseconds(1);
  c.retry.timeout = std::chrono::seconds(5);
  return c;
}

Document cv(std::string id, std::string text) {
  Document d;
  d.id = std::move(id);
  d.kind = DocKind::CV;
  d.text = std::move(text);
  return d;
}

struct KeyGuard {
  KeyGuard() { ::setenv(kKeyEnv, "secret", 1); }
  ~KeyGuard() { ::unsetenv(kKeyEnv); }
};

}  // namespace

TEST_CASE("reply equal to the appendix example parses like the raw json") {
  KeyGuard key;
  const std::string example = testsupport::fixture("llm_reply_example.json");
  testsupport::MockServer server(
      [&](const httplib::Request&, httplib::Response& res, int) { res.set_content(chat_reply(example), "application/json"); });
  const LlmClient client(config_for(server));
  const auto raw = extract_llm(cv("cv-1", "some cv text"), client);
  CHECK(raw == parse_llm_response(example, "cv-1"));
  CHECK(server.requests() == 1);
  CHECK(server.last_auth() == "Bearer secret");
  const auto body = nlohmann::json::parse(server.last_body());
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"].get<std::string>() == build_prompt(cv("cv-1", "some cv text")));
}

TEST_CASE("three server errors then success") {
  KeyGuard key;
  testsupport::MockServer server([](const httplib::Request&, httplib::Response& res, int n) {
    if (n <= 3) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    } else {
      res.set_content(chat_reply("{\"Skills\":[\"go\"]}"), "application/json");
    }
  });
  const LlmClient client(config_for(server));
  const auto raw = extract_llm(cv("cv-2", "x"), client);
  CHECK(raw.groups.at(EntityType::Skill) == std::vector<std::string>{"go"});
  CHECK(server.requests() == 4);
}

TEST_CASE("retries are bounded") {
  KeyGuard key;
  testsupport::MockServer server(
      [](const httplib::Request&, httplib::Response& res, int) { res.status = 503; });
  auto cfg = config_for(server);
  cfg.retry.retry_max = 2;
  const LlmClient client(cfg);
  CHECK_THROWS_AS(extract_llm(cv("cv-3", "x"), client), NetworkError);
  CHECK(server.requests() == 3);
}

TEST_CASE("client errors are not retried") {
  KeyGuard key;
  testsupport::MockServer server(
      [](const httplib::Request&, httplib::Response& res, int) { res.status = 401; });
  const LlmClient client(config_for(server));
  try {
    extract_llm(cv("cv-4", "x"), client);
    FAIL("expected a network error");
  } catch (const NetworkError& e) {
    CHECK(std::string(e.what()).find("cv-4") != std::string::npos);
  }
  CHECK(server.requests() == 1);
}

TEST_CASE("prose reply surfaces a parse error with the doc id and raw reply") {
  KeyGuard key;
  testsupport::MockServer server([](const httplib::Request&, httplib::Response& res, int) {
    res.set_content(chat_reply("I could not find any entities."), "application/json");
  });
  const LlmClient client(config_for(server));
  try {
    extract_llm(cv("cv-77", "x"), client);
    FAIL("expected a parse error");
  } catch (const ExtractionParseError& e) {
    CHECK(e.doc_id() == "cv-77");
    CHECK(e.raw_reply() == "I could not find any entities.");
  }
}

TEST_CASE("missing key is a configuration error") {
  ::unsetenv(kKeyEnv);
  LlmClientConfig c;
  c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  c.api_key_env = kKeyEnv;
  CHECK_THROWS_AS(LlmClient{c}, ConfigError);
  KeyGuard key;
  c.endpoint.clear();
  CHECK_THROWS_AS(LlmClient{c}, ConfigError);
}

TEST_CASE("batch extraction keeps order and reports failures") {
  KeyGuard key;
  testsupport::MockServer server([](const httplib::Request& req, httplib::Response& res, int) {
    const auto body = nlohmann::json::parse(req.body);
    const std::string prompt = body["messages"][0]["content"];
    if (prompt.find("broken") != std::string::npos) {
      res.set_content(chat_reply("nothing"), "application/json");
      return;
    }
    const std::string word = prompt.substr(prompt.rfind('\n') + 1);
    res.set_content(chat_reply("{\"Skills\":[\"" + word + "\"]}"), "application/json");
  });
  auto cfg = config_for(server);
  cfg.max_in_flight = 3;
  testsupport::TempDir dir;
  cfg.audit_path = dir / "audit.jsonl";
  const LlmClient client(cfg);
  std::vector<Document> docs;
  for (int i = 0; i < 9; ++i) docs.push_back(cv("cv-" + std::to_string(i), i == 4 ? "broken" : "w" + std::to_string(i)));
  const auto batch = extract_llm_batch(docs, client);
  REQUIRE(batch.results.size() == 9);
  for (int i = 0; i < 9; ++i) {
    if (i == 4) {
      CHECK_FALSE(batch.results[i].has_value());
      continue;
    }
    REQUIRE(batch.results[i].has_value());
    CHECK(batch.results[i]->doc_id == docs[i].id);
    CHECK(batch.results[i]->groups.at(EntityType::Skill) == std::vector<std::string>{"w" + std::to_string(i)});
  }
  REQUIRE(batch.failures.size() == 1);
  CHECK(batch.failures[0].first == "cv-4");
  const std::string audit = testsupport::slurp(dir / "audit.jsonl");
  CHECK(std::count(audit.begin(), audit.end(), '\n') == 9);
}

TEST_CASE("reply text extraction") {
  CHECK(reply_text(chat_reply("abc")) == "abc");
  CHECK(reply_text("{\"content\":\"xyz\"}") == "xyz");
  CHECK(reply_text("plain") == "plain");
  CHECK(http::Endpoint::parse("https://api.example.com/v1/x").base == "https://api.example.com");
  CHECK(http::Endpoint::parse("https://api.example.com/v1/x").path == "/v1/x");
  CHECK_THROWS_AS(http::Endpoint::parse("not a url"), Error);
}
