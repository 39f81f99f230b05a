#include "hrkg/graph.hpp"

#include <algorithm>
#include <numeric>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"

namespace hrkg {

namespace {

constexpr std::array<std::string_view, kEntityTypeCount> kEdgeNames = {
    "HasEducation", "HasSkill", "HasQualification", "HasExperience", "HasOther"};

std::uint64_t edge_id(NodeIndex a, NodeIndex b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

EdgeKind edge_kind_for(EntityType type) { return static_cast<EdgeKind>(index_of(type)); }

std::string_view to_string(EdgeKind kind) { return kEdgeNames[static_cast<std::size_t>(kind)]; }

EdgeKind parse_edge_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEdgeNames.size(); ++i) {
    if (text::to_lower(s) == text::to_lower(kEdgeNames[i])) return static_cast<EdgeKind>(i);
  }
  throw ValidationError("unknown edge kind '" + std::string(s) + "'");
}

std::string_view NodeKind::name() const {
  return is_document() ? to_string(doc_kind) : to_string(etype);
}

NodeKind NodeKind::parse(std::string_view s) {
  const std::string f = text::to_lower(s);
  if (f == "cv" || f == "jd") return document(parse_doc_kind(s));
  return entity(parse_entity_type(s));
}

std::string KnowledgeGraph::document_key(std::string_view doc_id) {
  return "doc:" + std::string(doc_id);
}

std::string KnowledgeGraph::entity_key(EntityType type, std::string_view canonical) {
  return "ent:" + text::to_lower(to_string(type)) + ":" + std::string(canonical);
}

void KnowledgeGraph::require_mutable() const {
  if (frozen_) throw ValidationError("knowledge graph is frozen");
}

NodeIndex KnowledgeGraph::add_node(Node node) {
  require_mutable();
  if (node.key.empty()) throw ValidationError("node key is empty");
  if (index_.count(node.key)) throw ValidationError("duplicate node '" + node.key + "'");
  if (node.kind.is_entity() && node.area) {
    throw ValidationError("entity node '" + node.key + "' cannot carry a job area");
  }
  const NodeIndex i = nodes_.size();
  index_.emplace(node.key, i);
  nodes_.push_back(std::move(node));
  adjacency_.emplace_back();
  return i;
}

void KnowledgeGraph::add_edge(NodeIndex doc, NodeIndex entity, EdgeKind kind) {
  require_mutable();
  if (doc >= nodes_.size() || entity >= nodes_.size()) throw ValidationError("edge endpoint out of range");
  if (nodes_[doc].kind.is_entity()) std::swap(doc, entity);
  if (!nodes_[doc].kind.is_document() || !nodes_[entity].kind.is_entity()) {
    throw ValidationError("edge '" + nodes_[doc].key + "' -- '" + nodes_[entity].key +
                          "' must join a document and an entity");
  }
  if (kind != edge_kind_for(nodes_[entity].kind.etype)) {
    throw ValidationError("edge kind " + std::string(to_string(kind)) + " does not match entity '" +
                          nodes_[entity].key + "'");
  }
  if (!edge_set_.insert(edge_id(doc, entity)).second) return;
  edges_.push_back(Edge{doc, entity, kind});
  adjacency_[doc].push_back(entity);
  adjacency_[entity].push_back(doc);
}

NodeIndex KnowledgeGraph::entity_node(EntityType type, std::string_view canonical) {
  const std::string key = entity_key(type, canonical);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return add_node(Node{key, std::string(canonical), NodeKind::entity(type), std::nullopt});
}

NodeIndex KnowledgeGraph::add_document(std::string_view doc_id, DocKind kind,
                                       std::optional<JobArea> area, const EntitySet& entities) {
  require_mutable();
  const std::string key = document_key(doc_id);
  if (index_.count(key)) throw ValidationError("duplicate document id '" + std::string(doc_id) + "'");
  const NodeIndex d = add_node(Node{key, std::string(doc_id), NodeKind::document(kind), area});
  for (const auto& e : entities.entities) {
    const std::string canon = text::canonicalize(e.canonical);
    if (canon.empty()) continue;
    add_edge(d, entity_node(e.etype, canon), edge_kind_for(e.etype));
  }
  return d;
}

NodeIndex KnowledgeGraph::add_document(const Document& doc, const EntitySet& entities) {
  return add_document(doc.id, doc.kind, doc.label, entities);
}

void KnowledgeGraph::set_features(FeatureMatrix features) {
  if (features.rows() != nodes_.size()) {
    throw ValidationError("feature matrix has " + std::to_string(features.rows()) + " rows for " +
                          std::to_string(nodes_.size()) + " nodes");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (features.node_ids()[i] != nodes_[i].key) {
      throw ValidationError("feature row " + std::to_string(i) + " is for '" +
                            features.node_ids()[i] + "', expected '" + nodes_[i].key + "'");
    }
  }
  features_ = std::move(features);
}

std::optional<NodeIndex> KnowledgeGraph::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeIndex> KnowledgeGraph::find_document(std::string_view doc_id) const {
  return find(document_key(doc_id));
}

std::optional<NodeIndex> KnowledgeGraph::find_entity(EntityType type, std::string_view canonical) const {
  return find(entity_key(type, text::canonicalize(canonical)));
}

EntitySet KnowledgeGraph::entities_of(NodeIndex doc) const {
  EntitySet s;
  s.doc_id = nodes_[doc].label;
  for (NodeIndex e : adjacency_[doc]) {
    s.entities.push_back(Entity{nodes_[e].label, nodes_[e].label, nodes_[e].kind.etype});
  }
  return s;
}

std::vector<LabeledNode> KnowledgeGraph::labeled_nodes() const {
  std::vector<LabeledNode> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(LabeledNode{n.key, n.label});
  return out;
}

AdjacencyMatrix adjacency(const KnowledgeGraph& g) {
  AdjacencyMatrix a(g.node_count());
  for (const auto& e : g.edges()) a.set(e.doc, e.entity);
  return a;
}

GraphStats stats(const KnowledgeGraph& g) {
  GraphStats s;
  s.nodes = g.node_count();
  s.edges = g.edge_count();
  for (const auto& n : g.nodes()) ++s.node_kinds[std::string(n.kind.name())];
  for (const auto& e : g.edges()) ++s.edge_kinds[std::string(to_string(e.kind))];
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    ++s.degree_histogram[g.degree(i)];
    s.max_degree = std::max(s.max_degree, g.degree(i));
  }
  // Union-find over edges.
  std::vector<std::size_t> parent(g.node_count());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  s.components = g.node_count();
  for (const auto& e : g.edges()) {
    const auto a = root(e.doc);
    const auto b = root(e.entity);
    if (a != b) {
      parent[a] = b;
      --s.components;
    }
  }
  return s;
}

bool type_condition_holds(const KnowledgeGraph& g) {
  std::set<std::string_view> node_types;
  std::set<EdgeKind> edge_types;
  for (const auto& n : g.nodes()) node_types.insert(n.kind.name());
  for (const auto& e : g.edges()) edge_types.insert(e.kind);
  return node_types.size() + edge_types.size() > 2;
}

GraphSignature signature(const KnowledgeGraph& g) {
  GraphSignature s;
  for (const auto& n : g.nodes()) {
    s.nodes.emplace_back(n.key, n.label, std::string(n.kind.name()),
                         n.area ? std::string(to_string(*n.area)) : std::string());
  }
  for (const auto& e : g.edges()) {
    s.edges.emplace_back(g.node(e.doc).key, g.node(e.entity).key, std::string(to_string(e.kind)));
  }
  std::sort(s.nodes.begin(), s.nodes.end());
  std::sort(s.edges.begin(), s.edges.end());
  return s;
}

KnowledgeGraph build_graph(const std::vector<StoredEntitySet>& store) {
  KnowledgeGraph g;
  for (const auto& s : store) g.add_document(s.set.doc_id, s.kind, s.label, s.set);
  g.freeze();
  return g;
}

}  // namespace hrkg
