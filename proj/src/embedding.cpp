#include "hrkg/embedding.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <thread>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"
#include "json.hpp"

namespace hrkg {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kSignBasis = 0x84222325cbf29ce4ULL;

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

FeatureVector normalized(std::vector<double> v) {
  const double n = l2_norm(v);
  if (n == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return FeatureVector{std::move(v)};
  }
  for (double& x : v) x /= n;
  return FeatureVector{std::move(v)};
}

}  // namespace

double cosine(const FeatureVector& a, const FeatureVector& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < std::min(a.dim(), b.dim()); ++i) dot += a[i] * b[i];
  const double na = l2_norm(a.values);
  const double nb = l2_norm(b.values);
  return na == 0.0 || nb == 0.0 ? 0.0 : dot / (na * nb);
}

void FeatureMatrix::append(std::string node_id, const FeatureVector& v) {
  if (v.dim() != dim_) {
    throw ValidationError("feature row for '" + node_id + "' has dimension " +
                          std::to_string(v.dim()) + ", expected " + std::to_string(dim_));
  }
  for (double x : v.values) {
    if (!std::isfinite(x)) throw ValidationError("non-finite feature for '" + node_id + "'");
  }
  ids_.push_back(std::move(node_id));
  data_.insert(data_.end(), v.values.begin(), v.values.end());
}

FeatureVector hash_embed(std::string_view input, std::size_t dim) {
  if (dim < 8) throw ValidationError("feature dimension must be >= 8");
  const std::string padded = "^" + text::canonicalize(input) + "$";
  std::vector<double> v(dim, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::string_view gram(padded.data() + i, 3);
    const std::uint64_t bucket = text::fnv1a64(gram) % dim;
    const bool negative = (text::fnv1a64(gram, kSignBasis) >> 63) != 0;
    v[bucket] += negative ? -1.0 : 1.0;
  }
  return normalized(std::move(v));
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim) : dim_(dim) {
  if (dim < 8) throw ConfigError("feature dimension must be >= 8");
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEmbeddingConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("embedding endpoint is not configured");
  endpoint_ = http::Endpoint::parse(config_.endpoint);
  const char* key = config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
}

FeatureVector RemoteEmbeddingProvider::embed(std::string_view text) const {
  ordered_json req;
  req["model"] = config_.model;
  req["input"] = std::string(text);
  const auto res = http::post_json(endpoint_, req.dump(), {{"Authorization", "Bearer " + api_key_}},
                                   config_.retry);
  ordered_json j;
  try {
    j = ordered_json::parse(res.body);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("embedding reply is not JSON: ") + e.what());
  }
  const ordered_json* arr = nullptr;
  if (j.contains("data") && j["data"].is_array() && !j["data"].empty() &&
      j["data"][0].contains("embedding")) {
    arr = &j["data"][0]["embedding"];
  } else if (j.contains("embedding")) {
    arr = &j["embedding"];
  }
  if (arr == nullptr || !arr->is_array()) throw ParseError("embedding reply has no embedding array");
  std::vector<double> raw;
  raw.reserve(arr->size());
  for (const auto& x : *arr) {
    if (!x.is_number()) throw ParseError("embedding reply contains a non-number");
    raw.push_back(x.get<double>());
  }
  return truncate_normalize(raw, config_.dim);
}

FeatureVector truncate_normalize(std::span<const double> raw, std::size_t dim) {
  if (raw.size() < dim) {
    throw ValidationError("embedding has dimension " + std::to_string(raw.size()) +
                          ", need at least " + std::to_string(dim));
  }
  std::vector<double> v(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(dim));
  return normalized(std::move(v));
}

FeatureVector embed_text(const EmbeddingProvider& provider, std::string_view text) {
  // Empty text maps to e0 for every provider, matching hash_embed.
  if (text::canonicalize(text).empty()) return normalized(std::vector<double>(provider.dim(), 0.0));
  FeatureVector v = provider.embed(text);
  if (v.dim() != provider.dim()) {
    throw ValidationError(provider.name() + " provider returned dimension " +
                          std::to_string(v.dim()) + ", expected " + std::to_string(provider.dim()));
  }
  for (double x : v.values) {
    if (!std::isfinite(x)) throw ValidationError(provider.name() + " provider returned non-finite value");
  }
  return normalized(std::move(v.values));
}

FeatureMatrix build_feature_matrix(const std::vector<LabeledNode>& nodes,
                                   const EmbeddingProvider& provider, std::size_t max_in_flight) {
  std::vector<std::optional<FeatureVector>> rows(nodes.size());
  std::vector<std::string> errors(nodes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < nodes.size(); i = next++) {
      try {
        rows[i] = embed_text(provider, nodes[i].text);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads =
      provider.remote() ? std::min(std::max<std::size_t>(max_in_flight, 1), nodes.size()) : 0;
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  FeatureMatrix m(provider.dim());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!rows[i]) throw Error("embedding node '" + nodes[i].id + "': " + errors[i]);
    m.append(nodes[i].id, *rows[i]);
  }
  return m;
}

namespace {

std::filesystem::path stem_of(const std::filesystem::path& p) {
  const auto ext = p.extension();
  if (ext == ".json" || ext == ".bin") return p.parent_path() / p.stem();
  return p;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  const auto stem = stem_of(path);
  ordered_json header;
  header["dim"] = m.dim();
  header["count"] = m.rows();
  header["dtype"] = "float64-le";
  header["layout"] = "row-major";
  header["data"] = with_suffix(stem, ".bin").filename().string();
  header["node_ids"] = m.node_ids();
  std::ofstream hj(with_suffix(stem, ".json"), std::ios::binary);
  if (!hj) throw Error(with_suffix(stem, ".json").string() + ": cannot open for writing");
  hj << header.dump(1) << '\n';

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw Error(with_suffix(stem, ".bin").string() + ": cannot open for writing");
  for (double x : m.data()) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  const auto stem = stem_of(path);
  std::ifstream hj(with_suffix(stem, ".json"));
  if (!hj) throw ParseError(with_suffix(stem, ".json").string() + ": cannot open file");
  ordered_json header;
  try {
    header = ordered_json::parse(hj);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(with_suffix(stem, ".json").string() + ": " + e.what());
  }
  const auto dim = header.at("dim").get<std::size_t>();
  const auto count = header.at("count").get<std::size_t>();
  const auto ids = header.at("node_ids").get<std::vector<std::string>>();
  if (ids.size() != count) throw ParseError("feature header: node_ids length differs from count");

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw ParseError(with_suffix(stem, ".bin").string() + ": cannot open file");
  FeatureMatrix m(dim);
  std::vector<double> row(dim);
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      std::uint64_t bits = 0;
      if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw ParseError(with_suffix(stem, ".bin").string() + ": truncated data");
      }
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      row[c] = std::bit_cast<double>(bits);
    }
    m.append(ids[r], FeatureVector{row});
  }
  return m;
}

}  // namespace hrkg
