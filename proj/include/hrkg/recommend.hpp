#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrkg/extraction.hpp"
#include "hrkg/graph.hpp"

namespace hrkg {

inline constexpr std::size_t kDefaultHops = 3;

struct Query {
  std::string id;
  EntitySet entities;
  DocKind target_kind = DocKind::JD;
  std::size_t top_n = 5;
  /// Source document, never returned as a candidate.
  std::optional<std::string> exclude_doc;
  /// Category of the querying document, used for evaluation.
  std::optional<JobArea> area;
};

/// Query built from a document node already in the graph; targets the
/// opposite document kind unless `target` is given.
Query query_for_document(const KnowledgeGraph& g, std::string_view doc_id, std::size_t top_n,
                         std::optional<DocKind> target = std::nullopt);

enum class Centrality { Degree, PageRank };
enum class RecMethod { Propagation, Direct, Random };

Centrality parse_centrality(std::string_view s);
std::string_view to_string(Centrality c);
std::string_view to_string(RecMethod m);

struct RecItem {
  std::string doc_id;
  double score = 0.0;
  /// Query entities (canonical forms) adjacent to the document.
  std::vector<std::string> matched_entities;

  bool operator==(const RecItem&) const = default;
};

/// Ranked by score desc, then matched-entity count desc, then doc_id asc.
struct RankedRecommendation {
  std::string query_id;
  RecMethod method = RecMethod::Propagation;
  std::size_t top_n = 0;
  std::vector<RecItem> items;

  bool operator==(const RankedRecommendation&) const = default;
};

/// Entity nodes whose (canonical, etype) appears in the query, ascending.
std::vector<NodeIndex> match_entities(const KnowledgeGraph& g, const Query& q);

/// Induced subgraph over nodes within `hops` BFS steps of the seeds.
struct Subgraph {
  /// Parent indices, ascending.
  std::vector<NodeIndex> nodes;
  /// BFS distance per local node.
  std::vector<std::size_t> distance;
  /// Local adjacency lists (indices into `nodes`).
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  std::size_t edge_count() const;
};

Subgraph khop_subgraph(const KnowledgeGraph& g, std::span<const NodeIndex> seeds,
                       std::size_t hops = kDefaultHops);

struct PageRankOptions {
  double damping = 0.85;
  std::size_t max_iterations = 100;
  /// Stop once the L1 change between iterations drops below this.
  double tolerance = 1e-9;
};

/// Degree within the subgraph, or PageRank with uniform teleport (dangling
/// mass spread uniformly; scores sum to 1). Throws on an empty subgraph.
std::vector<double> centrality(const Subgraph& sub, Centrality measure,
                               const PageRankOptions& options = {});

/// Seed match, k-hop expansion, centrality ranking of target documents.
/// Requires a frozen graph.
RankedRecommendation recommend(const KnowledgeGraph& g, const Query& q,
                               Centrality measure = Centrality::Degree,
                               std::size_t hops = kDefaultHops);

struct DocumentEntities {
  std::string doc_id;
  DocKind kind = DocKind::CV;
  EntitySet entities;
};

std::vector<DocumentEntities> document_entities(const KnowledgeGraph& g);

/// Scores each target document by |query entities ∩ document entities|.
RankedRecommendation baseline_direct(const Query& q, const std::vector<DocumentEntities>& corpus,
                                     std::size_t top_n);

/// Uniform sample without replacement; scores descend with rank.
/// Throws ValidationError when top_n > doc_ids.size().
RankedRecommendation baseline_random(const std::vector<std::string>& doc_ids, std::size_t top_n,
                                     std::uint64_t seed);

struct QueryMetrics {
  std::string query_id;
  std::size_t hits = 0;
  std::size_t returned = 0;
  std::size_t top_n = 0;
  double accuracy = 0.0;
  double precision = 0.0;
};

struct RecMetrics {
  double avg_accuracy = 0.0;
  double avg_precision = 0.0;
  std::vector<QueryMetrics> per_query;
};

/// accuracy = category matches / top_n; precision = matches / returned
/// (0 for an empty list). `labels` must cover query ids and every
/// recommended document.
RecMetrics evaluate_recommendations(const std::vector<RankedRecommendation>& results,
                                    const std::map<std::string, JobArea>& labels);

struct RecTableRow {
  std::string n;
  std::string task;
  double avg_accuracy = 0.0;
  double avg_precision = 0.0;
};

/// Markdown table with columns N | Task | Avg. Acc. | Avg. Prec.
std::string render_recommendation_table(const std::vector<RecTableRow>& rows);

/// "Job Rec." for JD targets, "Employee Rec." for CV targets.
std::string_view task_name(DocKind target_kind);

}  // namespace hrkg
