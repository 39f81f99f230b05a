#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "hrkg/embedding.hpp"
#include "hrkg/error.hpp"
#include "hrkg/text.hpp"
#include "json.hpp"
#include "mock_server.hpp"
#include "support.hpp"

using namespace hrkg;

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::set<std::string> trigrams(const std::string& s) {
  const std::string p = "^" + text::canonicalize(s) + "$";
  std::set<std::string> out;
  for (std::size_t i = 0; i + 3 <= p.size(); ++i) out.insert(p.substr(i, 3));
  return out;
}

double jaccard(const std::string& a, const std::string& b) {
  const auto x = trigrams(a);
  const auto y = trigrams(b);
  std::size_t both = 0;
  for (const auto& g : x) both += y.count(g);
  return static_cast<double>(both) / static_cast<double>(x.size() + y.size() - both);
}

class FixedProvider final : public EmbeddingProvider {
 public:
  explicit FixedProvider(std::vector<double> v) : v_(std::move(v)) {}
  std::size_t dim() const override { return 4; }
  std::string name() const override { return "fixed"; }
  FeatureVector embed(std::string_view) const override { return {v_}; }

 private:
  std::vector<double> v_;
};

}  // namespace

TEST_CASE("hash embedding is deterministic and unit norm") {
  const HashEmbeddingProvider p;
  const auto a = embed_text(p, "python");
  CHECK(a == embed_text(p, "python"));
  CHECK(a.dim() == kDefaultFeatureDim);
  CHECK(std::abs(norm(a.values) - 1.0) < 1e-6);
  for (const char* s : {"a", "machine learning", "É", "x y z w", "c++"}) {
    CHECK(std::abs(norm(embed_text(p, s).values) - 1.0) < 1e-6);
  }
}

TEST_CASE("distinct trigrams give distinct vectors") {
  CHECK(cosine(hash_embed("abc", 256), hash_embed("abd", 256)) < 1.0);
}

TEST_CASE("canonicalisation happens before hashing") {
  CHECK(hash_embed("Python ", 256) == hash_embed("python", 256));
  CHECK(hash_embed("Team   Management", 256) == hash_embed("team management", 256));
}

TEST_CASE("empty text maps to e0") {
  const auto v = hash_embed("", 32);
  CHECK(v.values[0] == 1.0);
  CHECK(norm(v.values) == 1.0);
  CHECK(embed_text(HashEmbeddingProvider(32), "   ") == v);
}

TEST_CASE("cosine ordering follows trigram overlap") {
  const std::string q = "python programming";
  const std::vector<std::string> others = {"python programmer", "python", "zebra crossing"};
  for (std::size_t i = 0; i + 1 < others.size(); ++i) {
    REQUIRE(jaccard(q, others[i]) > jaccard(q, others[i + 1]));
    CHECK(cosine(hash_embed(q, 256), hash_embed(others[i], 256)) >
          cosine(hash_embed(q, 256), hash_embed(others[i + 1], 256)));
  }
}

TEST_CASE("truncation keeps the first components and renormalises") {
  std::vector<double> raw(768);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::sin(static_cast<double>(i) + 1.0);
  const auto v = truncate_normalize(raw, 256);
  REQUIRE(v.dim() == 256);
  const double n = norm(std::span<const double>(raw.data(), 256));
  for (std::size_t i = 0; i < 256; ++i) CHECK(v[i] == doctest::Approx(raw[i] / n).epsilon(1e-12));
  CHECK_THROWS_AS(truncate_normalize(std::span<const double>(raw.data(), 100), 256), ValidationError);
}

TEST_CASE("provider contract violations are reported") {
  CHECK_THROWS_AS(embed_text(FixedProvider({1, 2, 3}), "x"), ValidationError);
  CHECK_THROWS_AS(embed_text(FixedProvider({1, 2, NAN, 4}), "x"), ValidationError);
  const auto v = embed_text(FixedProvider({3, 0, 4, 0}), "x");
  CHECK(v.values == std::vector<double>{0.6, 0.0, 0.8, 0.0});
}

TEST_CASE("feature matrix shape and rows") {
  const HashEmbeddingProvider p;
  const std::vector<LabeledNode> nodes = {{"n1", "python"}, {"n2", "sql"}, {"n3", "python"}, {"n4", "aws"}, {"n5", "bsc"}};
  const auto m = build_feature_matrix(nodes, p);
  CHECK(m.rows() == 5);
  CHECK(m.dim() == 256);
  CHECK(m.data().size() == 5 * 256);
  CHECK(std::equal(m.row(0).begin(), m.row(0).end(), m.row(2).begin()));
  CHECK(m.node_ids() == std::vector<std::string>{"n1", "n2", "n3", "n4", "n5"});
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(norm(m.row(i)) - 1.0) < 1e-6);
    for (double x : m.row(i)) CHECK(std::isfinite(x));
  }
  CHECK(build_feature_matrix({}, p).rows() == 0);
}

TEST_CASE("appending a node never changes earlier rows") {
  const HashEmbeddingProvider p(64);
  std::vector<LabeledNode> nodes = {{"a", "excel"}, {"b", "outlook"}};
  const auto before = build_feature_matrix(nodes, p);
  nodes.push_back({"c", "sap"});
  const auto after = build_feature_matrix(nodes, p);
  for (std::size_t i = 0; i < before.rows(); ++i) {
    CHECK(std::equal(before.row(i).begin(), before.row(i).end(), after.row(i).begin()));
  }
}

TEST_CASE("feature matrix file round trip") {
  testsupport::TempDir dir;
  const auto m = build_feature_matrix({{"x", "one"}, {"y", "two"}}, HashEmbeddingProvider(16));
  save_feature_matrix(m, dir / "feat");
  CHECK(load_feature_matrix(dir / "feat") == m);
  CHECK(load_feature_matrix(dir / "feat.json") == m);
  CHECK(load_feature_matrix(dir / "feat.bin") == m);
}

TEST_CASE("remote provider truncates a 768-dim reply") {
  ::setenv("HRKG_TEST_EMBED_KEY", "k", 1);
  std::vector<double> raw(768);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = 1.0 + static_cast<double>(i % 7);
  testsupport::MockServer server([&](const httplib::Request&, httplib::Response& res, int) {
    nlohmann::json j;
    j["data"] = nlohmann::json::array({{{"embedding", raw}}});
    res.set_content(j.dump(), "application/json");
  });
  RemoteEmbeddingConfig cfg;
  cfg.endpoint = server.url("/v1/embeddings");
  cfg.model = "m";
  cfg.api_key_env = "HRKG_TEST_EMBED_KEY";
  cfg.retry.backoff_base = std::chrono::milliseconds(1);
  const RemoteEmbeddingProvider p(cfg);
  const auto v = embed_text(p, "python");
  const auto want = truncate_normalize(raw, 256);
  REQUIRE(v.dim() == want.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) CHECK(v[i] == doctest::Approx(want[i]).epsilon(1e-12));
  CHECK(nlohmann::json::parse(server.last_body())["input"] == "python");
  const auto m = build_feature_matrix({{"a", "x"}, {"b", "y"}, {"c", "z"}}, p, 2);
  CHECK(m.rows() == 3);
  ::unsetenv("HRKG_TEST_EMBED_KEY");
  CHECK_THROWS_AS(RemoteEmbeddingProvider{cfg}, ConfigError);
}

TEST_CASE("remote failures name the node") {
  ::setenv("HRKG_TEST_EMBED_KEY", "k", 1);
  testsupport::MockServer server([](const httplib::Request&, httplib::Response& res, int) {
    res.set_content("{\"data\":[{\"embedding\":[1,2,3]}]}", "application/json");
  });
  RemoteEmbeddingConfig cfg;
  cfg.endpoint = server.url("/e");
  cfg.api_key_env = "HRKG_TEST_EMBED_KEY";
  const RemoteEmbeddingProvider p(cfg);
  try {
    build_feature_matrix({{"node-7", "python"}}, p);
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("node-7") != std::string::npos);
  }
  ::unsetenv("HRKG_TEST_EMBED_KEY");
}
