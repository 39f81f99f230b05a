#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hrkg/corpus.hpp"
#include "hrkg/embedding.hpp"
#include "hrkg/extraction.hpp"
#include "hrkg/types.hpp"

namespace hrkg {

using NodeIndex = std::size_t;

enum class EdgeKind : std::uint8_t { HasEducation, HasSkill, HasQualification, HasExperience, HasOther };

/// Edge kind is determined by the entity endpoint's type.
EdgeKind edge_kind_for(EntityType type);
std::string_view to_string(EdgeKind kind);
EdgeKind parse_edge_kind(std::string_view s);

/// Either a document node (CV/JD) or a typed entity node.
struct NodeKind {
  enum class Tag : std::uint8_t { Document, Entity };

  Tag tag = Tag::Entity;
  DocKind doc_kind = DocKind::CV;
  EntityType etype = EntityType::Other;

  static NodeKind document(DocKind kind) { return {Tag::Document, kind, EntityType::Other}; }
  static NodeKind entity(EntityType type) { return {Tag::Entity, DocKind::CV, type}; }

  bool is_document() const { return tag == Tag::Document; }
  bool is_entity() const { return tag == Tag::Entity; }

  /// "CV", "JD", or the entity type name.
  std::string_view name() const;
  static NodeKind parse(std::string_view s);

  bool operator==(const NodeKind& o) const {
    return tag == o.tag && (is_document() ? doc_kind == o.doc_kind : etype == o.etype);
  }
  bool operator<(const NodeKind& o) const { return name() < o.name(); }
};

struct Node {
  /// Unique key: "doc:<id>" or "ent:<type>:<canonical>".
  std::string key;
  /// Document id or entity canonical form.
  std::string label;
  NodeKind kind;
  /// Job area, documents only.
  std::optional<JobArea> area;
};

/// Undirected; `doc` is always the document endpoint.
struct Edge {
  NodeIndex doc;
  NodeIndex entity;
  EdgeKind kind;
};

/// Undirected bipartite document-entity graph with optional node features.
///
/// Nodes are indexed in insertion order. Entity nodes are shared across
/// documents by (canonical, etype). After freeze() every mutator throws.
class KnowledgeGraph {
 public:
  static std::string document_key(std::string_view doc_id);
  static std::string entity_key(EntityType type, std::string_view canonical);

  /// Adds a document node plus one edge per distinct entity.
  /// Throws ValidationError on duplicate document ids.
  NodeIndex add_document(std::string_view doc_id, DocKind kind, std::optional<JobArea> area,
                         const EntitySet& entities);
  NodeIndex add_document(const Document& doc, const EntitySet& entities);

  /// Low-level construction used by importers; enforces the same invariants.
  NodeIndex add_node(Node node);
  void add_edge(NodeIndex doc, NodeIndex entity, EdgeKind kind);

  void set_features(FeatureMatrix features);
  const std::optional<FeatureMatrix>& features() const { return features_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeIndex>& neighbors(NodeIndex i) const { return adjacency_[i]; }
  std::size_t degree(NodeIndex i) const { return adjacency_[i].size(); }

  std::optional<NodeIndex> find(std::string_view key) const;
  std::optional<NodeIndex> find_document(std::string_view doc_id) const;
  std::optional<NodeIndex> find_entity(EntityType type, std::string_view canonical) const;

  /// Entities adjacent to a document node, as an EntitySet.
  EntitySet entities_of(NodeIndex doc) const;

  /// Labelled node list for feature construction, in node order.
  std::vector<LabeledNode> labeled_nodes() const;

 private:
  void require_mutable() const;
  NodeIndex entity_node(EntityType type, std::string_view canonical);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::unordered_set<std::uint64_t> edge_set_;
  std::optional<FeatureMatrix> features_;
  bool frozen_ = false;
};

/// Dense symmetric 0/1 adjacency, node order = insertion order.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(std::size_t n) : n_(n), data_(n * n, 0) {}

  std::size_t size() const { return n_; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j) { data_[i * n_ + j] = data_[j * n_ + i] = 1; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> data_;
};

AdjacencyMatrix adjacency(const KnowledgeGraph& g);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::map<std::string, std::size_t> node_kinds;
  std::map<std::string, std::size_t> edge_kinds;
  std::map<std::size_t, std::size_t> degree_histogram;
  std::size_t max_degree = 0;
  std::size_t components = 0;

  bool operator==(const GraphStats&) const = default;
};

GraphStats stats(const KnowledgeGraph& g);

/// |node types present| + |edge types present| > 2.
bool type_condition_holds(const KnowledgeGraph& g);

/// Order-independent description of a graph: sorted (key, label, kind, area)
/// node tuples and sorted (doc key, entity key, edge kind) triples. Two graphs
/// with equal signatures are isomorphic with equal labels and kinds.
struct GraphSignature {
  std::vector<std::tuple<std::string, std::string, std::string, std::string>> nodes;
  std::vector<std::tuple<std::string, std::string, std::string>> edges;

  bool operator==(const GraphSignature&) const = default;
};

GraphSignature signature(const KnowledgeGraph& g);

/// Builds a graph from an entity store in store order and freezes it.
KnowledgeGraph build_graph(const std::vector<StoredEntitySet>& store);

}  // namespace hrkg
