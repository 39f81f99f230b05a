#include "hrkg/config.hpp"

#include <fstream>
#include <set>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"

namespace hrkg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string_view extractor_name(ExtractorKind k) { return k == ExtractorKind::Llm ? "llm" : "gazetteer"; }

std::string_view embedding_name(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::Hash:
      return "hash";
    case EmbeddingKind::Remote:
      return "remote";
    case EmbeddingKind::None:
      return "none";
  }
  return "hash";
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as typos.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& into) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      into = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(label() + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& into, Parse parse) {
    std::string s;
    const bool present = j_.contains(key) && !j_.at(key).is_null();
    get(key, s);
    if (!present) return;
    try {
      into = parse(s);
    } catch (const Error& e) {
      throw ConfigError(label() + "." + key + ": " + e.what());
    }
  }

  Section sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    const auto it = j_.find(key);
    return Section(it == j_.end() || it->is_null() ? empty : *it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key " + label() + "." + k);
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace

ordered_json to_json(const Config& c) {
  ordered_json j;
  j["extractor"] = extractor_name(c.extractor);
  j["gazetteer"] = c.gazetteer;
  j["llm"] = {{"endpoint", c.llm.endpoint},           {"model", c.llm.model},
              {"api_key_env", c.llm.api_key_env},     {"max_in_flight", c.llm.max_in_flight},
              {"retry_max", c.llm.retry_max},         {"backoff_ms", c.llm.backoff_ms},
              {"timeout_s", c.llm.timeout_s}};
  j["audit_log"] = c.audit_log ? ordered_json(c.audit_log->string()) : ordered_json(nullptr);
  j["embedding"] = {{"provider", embedding_name(c.embedding.provider)},
                    {"feature_dim", c.embedding.feature_dim},
                    {"endpoint", c.embedding.endpoint},
                    {"model", c.embedding.model},
                    {"api_key_env", c.embedding.api_key_env}};
  j["refine"] = {{"max_words", c.max_words}};
  j["pii"] = {{"scrub", c.scrub_pii}, {"names_file", c.pii_names}};
  j["recommend"] = {{"hops", c.hops}, {"centrality", to_string(c.centrality)}, {"top_n", c.top_n}};
  j["gnn"] = {{"hidden_dim", c.gnn.hidden_dim},   {"n_layers", c.gnn.n_layers},
              {"n_heads", c.gnn.n_heads},         {"epochs", c.gnn.epochs},
              {"learning_rate", c.gnn.learning_rate}, {"weight_decay", c.gnn.weight_decay},
              {"optimizer", to_string(c.gnn.optimizer)}};
  j["seeds"] = {{"split", c.seeds.split}, {"train", c.seeds.train}, {"random_baseline", c.seeds.random_baseline}};
  j["synth"] = {{"seed", c.synth.seed},
                {"docs_per_category", c.synth.docs_per_category},
                {"cross_category_overlap", c.synth.cross_category_overlap},
                {"terms_per_doc", c.synth.terms_per_doc}};
  return j;
}

Config config_from_json(const json& j) {
  Config c;
  Section root(j, "");
  root.get_enum("extractor", c.extractor, [](std::string_view s) {
    const auto l = text::to_lower(s);
    if (l == "gazetteer") return ExtractorKind::Gazetteer;
    if (l == "llm") return ExtractorKind::Llm;
    throw ConfigError("unknown extractor '" + std::string(s) + "' (valid: gazetteer, llm)");
  });
  root.get("gazetteer", c.gazetteer);
  {
    auto s = root.sub("llm");
    s.get("endpoint", c.llm.endpoint);
    s.get("model", c.llm.model);
    s.get("api_key_env", c.llm.api_key_env);
    s.get("max_in_flight", c.llm.max_in_flight);
    s.get("retry_max", c.llm.retry_max);
    s.get("backoff_ms", c.llm.backoff_ms);
    s.get("timeout_s", c.llm.timeout_s);
    s.finish();
  }
  std::string audit;
  root.get("audit_log", audit);
  if (!audit.empty()) c.audit_log = audit;
  {
    auto s = root.sub("embedding");
    s.get_enum("provider", c.embedding.provider, [](std::string_view v) {
      const auto l = text::to_lower(v);
      if (l == "hash") return EmbeddingKind::Hash;
      if (l == "remote") return EmbeddingKind::Remote;
      if (l == "none") return EmbeddingKind::None;
      throw ConfigError("unknown embedding provider '" + std::string(v) + "' (valid: hash, remote, none)");
    });
    s.get("feature_dim", c.embedding.feature_dim);
    s.get("endpoint", c.embedding.endpoint);
    s.get("model", c.embedding.model);
    s.get("api_key_env", c.embedding.api_key_env);
    s.finish();
  }
  {
    auto s = root.sub("refine");
    s.get("max_words", c.max_words);
    s.finish();
  }
  {
    auto s = root.sub("pii");
    s.get("scrub", c.scrub_pii);
    s.get("names_file", c.pii_names);
    s.finish();
  }
  {
    auto s = root.sub("recommend");
    s.get("hops", c.hops);
    s.get_enum("centrality", c.centrality, parse_centrality);
    s.get("top_n", c.top_n);
    s.finish();
  }
  {
    auto s = root.sub("gnn");
    s.get("hidden_dim", c.gnn.hidden_dim);
    s.get("n_layers", c.gnn.n_layers);
    s.get("n_heads", c.gnn.n_heads);
    s.get("epochs", c.gnn.epochs);
    s.get("learning_rate", c.gnn.learning_rate);
    s.get("weight_decay", c.gnn.weight_decay);
    s.get_enum("optimizer", c.gnn.optimizer, parse_optimizer);
    s.finish();
  }
  {
    auto s = root.sub("seeds");
    s.get("split", c.seeds.split);
    s.get("train", c.seeds.train);
    s.get("random_baseline", c.seeds.random_baseline);
    s.finish();
  }
  {
    auto s = root.sub("synth");
    s.get("seed", c.synth.seed);
    s.get("docs_per_category", c.synth.docs_per_category);
    s.get("cross_category_overlap", c.synth.cross_category_overlap);
    s.get("terms_per_doc", c.synth.terms_per_doc);
    s.finish();
  }
  root.finish();

  if (c.max_words == 0) throw ConfigError("refine.max_words must be positive");
  if (c.top_n == 0) throw ConfigError("recommend.top_n must be positive");
  if (c.embedding.feature_dim < 8) throw ConfigError("embedding.feature_dim must be at least 8");
  if (c.gnn.hidden_dim == 0 || c.gnn.n_layers == 0 || c.gnn.n_heads == 0) {
    throw ConfigError("gnn dimensions must be positive");
  }
  if (!(c.gnn.learning_rate > 0.0)) throw ConfigError("gnn.learning_rate must be positive");
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

LlmClientConfig llm_client_config(const Config& c) {
  LlmClientConfig l;
  l.endpoint = c.llm.endpoint;
  l.model = c.llm.model;
  l.api_key_env = c.llm.api_key_env;
  l.max_in_flight = c.llm.max_in_flight;
  l.retry.retry_max = c.llm.retry_max;
  l.retry.backoff_base = std::chrono::milliseconds(c.llm.backoff_ms);
  l.retry.timeout = std::chrono::seconds(c.llm.timeout_s);
  l.audit_path = c.audit_log;
  return l;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const Config& c) {
  switch (c.embedding.provider) {
    case EmbeddingKind::Hash:
      return std::make_unique<HashEmbeddingProvider>(c.embedding.feature_dim);
    case EmbeddingKind::Remote: {
      RemoteEmbeddingConfig r;
      r.endpoint = c.embedding.endpoint;
      r.model = c.embedding.model;
      r.api_key_env = c.embedding.api_key_env;
      r.dim = c.embedding.feature_dim;
      r.retry = llm_client_config(c).retry;
      return std::make_unique<RemoteEmbeddingProvider>(r);
    }
    case EmbeddingKind::None:
      return nullptr;
  }
  return nullptr;
}

Gazetteer make_configured_gazetteer(const Config& c) {
  return c.gazetteer.empty() ? make_gazetteer(default_entity_pools()) : load_gazetteer(c.gazetteer);
}

ClsExperimentConfig classification_config(const Config& c) {
  ClsExperimentConfig e;
  e.shape.hidden_dim = c.gnn.hidden_dim;
  e.shape.n_layers = c.gnn.n_layers;
  e.shape.n_heads = c.gnn.n_heads;
  e.train.epochs = c.gnn.epochs;
  e.train.learning_rate = c.gnn.learning_rate;
  e.train.weight_decay = c.gnn.weight_decay;
  e.train.optimizer = c.gnn.optimizer;
  e.train.seed = c.seeds.train;
  e.split_seed = c.seeds.split;
  return e;
}

}  // namespace hrkg
