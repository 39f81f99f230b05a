#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrkg/http.hpp"

namespace hrkg {

inline constexpr std::size_t kDefaultFeatureDim = 256;

/// Unit-norm node feature vector.
struct FeatureVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const FeatureVector&) const = default;
};

double cosine(const FeatureVector& a, const FeatureVector& b);

/// Row-major matrix with one row per node, in node insertion order.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return ids_.size(); }
  const std::vector<std::string>& node_ids() const { return ids_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<double>& data() const { return data_; }

  /// Throws ValidationError on dimension mismatch or non-finite entries.
  void append(std::string node_id, const FeatureVector& v);

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  /// Raw provider output; embed_text() enforces the vector contract.
  virtual FeatureVector embed(std::string_view text) const = 0;
  /// Whether concurrent embed() calls are worthwhile (remote providers).
  virtual bool remote() const { return false; }
};

/// Character 3-gram feature hashing with signed buckets.
FeatureVector hash_embed(std::string_view text, std::size_t dim);

class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dim = kDefaultFeatureDim);
  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "hash"; }
  FeatureVector embed(std::string_view text) const override { return hash_embed(text, dim_); }

 private:
  std::size_t dim_;
};

struct RemoteEmbeddingConfig {
  std::string endpoint;
  std::string model;
  std::string api_key_env = "HRKG_EMBED_API_KEY";
  std::size_t dim = kDefaultFeatureDim;
  http::RetryPolicy retry;
};

/// OpenAI-style embeddings endpoint: body {"model", "input"}, reply
/// {"data": [{"embedding": [...]}]} or {"embedding": [...]}.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(RemoteEmbeddingConfig config);
  std::size_t dim() const override { return config_.dim; }
  std::string name() const override { return "remote"; }
  FeatureVector embed(std::string_view text) const override;
  bool remote() const override { return true; }

 private:
  RemoteEmbeddingConfig config_;
  http::Endpoint endpoint_;
  std::string api_key_;
};

/// Keeps the first `dim` components and renormalises. Shorter inputs are a
/// ValidationError; vectors are never zero-padded.
FeatureVector truncate_normalize(std::span<const double> raw, std::size_t dim);

/// Provider output checked for dimension and finiteness, L2-normalised.
/// Blank text maps to e0 without calling the provider.
FeatureVector embed_text(const EmbeddingProvider& provider, std::string_view text);

struct LabeledNode {
  std::string id;
  std::string text;
};

/// Row i embeds nodes[i].text. Errors name the failing node.
FeatureMatrix build_feature_matrix(const std::vector<LabeledNode>& nodes,
                                   const EmbeddingProvider& provider,
                                   std::size_t max_in_flight = 4);

/// Writes `<stem>.json` (dim, count, node ids, layout) and `<stem>.bin`
/// (little-endian float64, row-major).
void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& stem);

/// Accepts the stem, the .json header, or the .bin path.
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

}  // namespace hrkg
