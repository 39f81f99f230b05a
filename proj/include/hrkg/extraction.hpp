#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hrkg/corpus.hpp"
#include "hrkg/types.hpp"

namespace hrkg {

struct Entity {
  std::string surface;
  std::string canonical;
  EntityType etype = EntityType::Other;

  bool operator==(const Entity&) const = default;
};

/// Unrefined extraction output, grouped by type in emission order.
struct RawEntitySet {
  std::string doc_id;
  std::map<EntityType, std::vector<std::string>> groups;

  std::size_t size() const;
  bool operator==(const RawEntitySet&) const = default;
};

/// Refined entities; unique on (canonical, etype).
struct EntitySet {
  std::string doc_id;
  std::vector<Entity> entities;

  bool operator==(const EntitySet&) const = default;
};

// ---------------------------------------------------------------------------
// Prompts

inline constexpr std::string_view kCvTextMarker = "<Insert CV text here>";
inline constexpr std::string_view kJdTextMarker = "<Insert job description text here>";

/// Prompt templates with the insertion marker on the final line.
std::string_view prompt_template(DocKind kind);

/// Template for doc.kind with the document text substituted at the marker.
std::string build_prompt(const Document& doc);

// ---------------------------------------------------------------------------
// Response parsing

/// Extracts the first JSON object in `raw` (code fences and surrounding prose
/// are tolerated), maps top-level keys to entity types and collects every
/// leaf string below each key. Throws ParseError when no object is found or
/// it holds no strings.
RawEntitySet parse_llm_response(std::string_view raw, std::string_view doc_id = {});

/// Inverse of parse_llm_response for well-formed sets.
std::string to_response_json(const RawEntitySet& set);

// ---------------------------------------------------------------------------
// Gazetteer extraction

/// Typed term list matched case-insensitively, longest match first, on word
/// boundaries.
class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(const std::map<EntityType, std::vector<std::string>>& terms);

  void add(std::string_view term, EntityType type);
  bool empty() const { return term_count_ == 0; }
  std::size_t size() const { return term_count_; }

  RawEntitySet extract(const Document& doc) const;

  /// Terms in (type, term) order, for serialisation.
  std::vector<std::pair<EntityType, std::string>> entries() const;

 private:
  struct TrieNode {
    std::map<unsigned char, std::size_t> next;
    std::vector<EntityType> types;  // sorted, non-empty on terminals
  };
  std::vector<TrieNode> nodes_{TrieNode{}};
  std::size_t term_count_ = 0;
};

Gazetteer make_gazetteer(const EntityPools& pools);

/// JSONL lines of {"type": ..., "term": ...}.
Gazetteer load_gazetteer(const std::filesystem::path& path);
void save_gazetteer(const Gazetteer& gazetteer, const std::filesystem::path& path);

RawEntitySet extract_gazetteer(const Document& doc, const Gazetteer& gazetteer);

// ---------------------------------------------------------------------------
// Refinement

struct RefineOptions {
  std::size_t max_words = 3;
  /// nullptr selects text::english_stopwords().
  const std::unordered_set<std::string>* stopwords = nullptr;
};

/// Drops over-long and content-free entities, canonicalises, and
/// deduplicates on (canonical, etype) keeping the first occurrence.
EntitySet refine(const RawEntitySet& raw, const RefineOptions& options = {});

/// EntitySet back into RawEntitySet shape (surface strings per type).
RawEntitySet lift(const EntitySet& set);

/// True when every token is a stopword or has no letters.
bool is_content_free(std::string_view canonical,
                     const std::unordered_set<std::string>& stopwords);

// ---------------------------------------------------------------------------
// Entity store (JSONL, one document per line)

struct StoredEntitySet {
  EntitySet set;
  DocKind kind = DocKind::CV;
  std::optional<JobArea> label;

  bool operator==(const StoredEntitySet&) const = default;
};

std::string to_jsonl_line(const StoredEntitySet& stored);
StoredEntitySet parse_entity_store_line(std::string_view line);
std::vector<StoredEntitySet> load_entity_store(const std::filesystem::path& path);
void save_entity_store(const std::vector<StoredEntitySet>& store,
                       const std::filesystem::path& path);

}  // namespace hrkg
