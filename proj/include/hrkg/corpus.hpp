#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrkg/types.hpp"

namespace hrkg {

/// One CV or job description.
struct Document {
  std::string id;
  DocKind kind = DocKind::CV;
  std::string text;
  std::optional<JobArea> label;
  std::map<std::string, std::string> meta;

  bool operator==(const Document&) const = default;
};

enum class Provenance { Loaded, Synthetic };

/// Ordered, id-unique document collection. Immutable once built.
class Corpus {
 public:
  Corpus() = default;

  /// Throws ValidationError naming the first duplicate id.
  Corpus(std::vector<Document> documents, Provenance provenance,
         std::optional<std::uint64_t> seed = std::nullopt);

  const std::vector<Document>& documents() const { return documents_; }
  Provenance provenance() const { return provenance_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  const Document* find(std::string_view id) const;
  bool fully_labeled() const;

 private:
  std::vector<Document> documents_;
  Provenance provenance_ = Provenance::Loaded;
  std::optional<std::uint64_t> seed_;
};

enum class CorpusFormat { Jsonl, Csv };

CorpusFormat corpus_format_from_path(const std::filesystem::path& path);

/// Reads JSONL (id, kind, text, label?, meta?) or CSV (header id,kind,text,label).
/// Errors are ParseError with "<source>:<line>: ..." or ValidationError.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus parse_corpus(std::istream& in, CorpusFormat format, std::string_view source_name);

/// Canonical JSONL form, one document per line.
std::string to_jsonl(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

inline constexpr std::string_view kRedacted = "[REDACTED]";

struct ScrubResult {
  std::string text;
  std::size_t removed_count = 0;
};

/// Replaces emails, phone numbers (7+ digits with optional separators or a
/// leading '+') and configured names with kRedacted. Idempotent.
class PiiScrubber {
 public:
  explicit PiiScrubber(std::vector<std::string> names = {});

  ScrubResult scrub(std::string_view text) const;

 private:
  std::vector<std::string> names_;
};

ScrubResult scrub_pii(std::string_view text, const std::vector<std::string>& names = {});

/// Reads a newline-separated name list; blank lines and '#' comments skipped.
std::vector<std::string> load_name_list(const std::filesystem::path& path);

struct PoolTerm {
  std::string term;
  EntityType type = EntityType::Skill;
};

using EntityPools = std::map<JobArea, std::vector<PoolTerm>>;

/// Built-in per-category vocabulary used by the synthetic generator.
const EntityPools& default_entity_pools();

struct SynthParams {
  std::uint64_t seed = 42;
  std::size_t docs_per_category = 10;
  double cross_category_overlap = 0.25;
  /// Terms embedded per document; floor(overlap * terms) come from other
  /// categories, the rest from the document's own pool.
  std::size_t terms_per_doc = 8;
};

/// docs_per_category CVs and JDs for every category, labelled with the
/// generating category. Byte-identical output for identical inputs.
Corpus synth_corpus(const SynthParams& params, const EntityPools& pools = default_entity_pools());

}  // namespace hrkg
