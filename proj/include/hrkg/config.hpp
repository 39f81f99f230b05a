#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "hrkg/embedding.hpp"
#include "hrkg/extraction.hpp"
#include "hrkg/gnn.hpp"
#include "hrkg/llm_client.hpp"
#include "hrkg/pipeline.hpp"
#include "hrkg/recommend.hpp"
#include "json.hpp"

namespace hrkg {

enum class ExtractorKind { Gazetteer, Llm };
enum class EmbeddingKind { Hash, Remote, None };

struct LlmSettings {
  std::string endpoint;
  std::string model;
  std::string api_key_env = "HRKG_LLM_API_KEY";
  std::size_t max_in_flight = 4;
  int retry_max = 3;
  std::size_t backoff_ms = 200;
  std::size_t timeout_s = 60;
};

struct EmbeddingSettings {
  EmbeddingKind provider = EmbeddingKind::Hash;
  std::size_t feature_dim = kDefaultFeatureDim;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "HRKG_EMBED_API_KEY";
};

struct GnnSettings {
  std::size_t hidden_dim = 64;
  std::size_t n_layers = 4;
  std::size_t n_heads = 1;
  std::size_t epochs = 200;
  double learning_rate = 0.005;
  double weight_decay = 5e-4;
  Optimizer optimizer = Optimizer::Adam;
};

struct Seeds {
  std::uint64_t split = 42;
  std::uint64_t train = 42;
  std::uint64_t random_baseline = 42;
};

/// Every pipeline knob with its default. Serialises to a single JSON object;
/// unknown keys are rejected.
struct Config {
  ExtractorKind extractor = ExtractorKind::Gazetteer;
  /// JSONL {type, term} lines; empty selects the built-in term pools.
  std::string gazetteer;
  LlmSettings llm;
  std::optional<std::filesystem::path> audit_log;
  EmbeddingSettings embedding;
  std::size_t max_words = 3;
  bool scrub_pii = true;
  std::string pii_names;
  std::size_t hops = kDefaultHops;
  Centrality centrality = Centrality::Degree;
  std::size_t top_n = 5;
  GnnSettings gnn;
  Seeds seeds;
  SynthParams synth;
};

nlohmann::ordered_json to_json(const Config& c);
/// Missing keys keep their defaults. Throws ConfigError on unknown keys or
/// invalid values.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);

LlmClientConfig llm_client_config(const Config& c);
/// nullptr for EmbeddingKind::None.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const Config& c);
Gazetteer make_configured_gazetteer(const Config& c);
ClsExperimentConfig classification_config(const Config& c);

}  // namespace hrkg
