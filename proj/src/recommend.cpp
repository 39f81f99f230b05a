#include "hrkg/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <set>

#include "hrkg/error.hpp"
#include "hrkg/rng.hpp"
#include "hrkg/text.hpp"

namespace hrkg {

Query query_for_document(const KnowledgeGraph& g, std::string_view doc_id, std::size_t top_n,
                         std::optional<DocKind> target) {
  const auto idx = g.find_document(doc_id);
  if (!idx) throw ValidationError("unknown document id '" + std::string(doc_id) + "'");
  const Node& n = g.node(*idx);
  Query q;
  q.id = std::string(doc_id);
  q.entities = g.entities_of(*idx);
  q.target_kind = target.value_or(opposite(n.kind.doc_kind));
  q.top_n = top_n;
  q.exclude_doc = std::string(doc_id);
  q.area = n.area;
  return q;
}

Centrality parse_centrality(std::string_view s) {
  const std::string f = text::to_lower(s);
  if (f == "degree") return Centrality::Degree;
  if (f == "pagerank") return Centrality::PageRank;
  throw ValidationError("unknown centrality '" + std::string(s) + "' (valid: degree, pagerank)");
}

std::string_view to_string(Centrality c) { return c == Centrality::Degree ? "degree" : "pagerank"; }

std::string_view to_string(RecMethod m) {
  switch (m) {
    case RecMethod::Propagation: return "propagation";
    case RecMethod::Direct: return "direct";
    case RecMethod::Random: return "random";
  }
  return "propagation";
}

std::vector<NodeIndex> match_entities(const KnowledgeGraph& g, const Query& q) {
  std::vector<NodeIndex> seeds;
  for (const auto& e : q.entities.entities) {
    if (auto i = g.find_entity(e.etype, e.canonical)) seeds.push_back(*i);
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

std::size_t Subgraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adjacency) twice += a.size();
  return twice / 2;
}

Subgraph khop_subgraph(const KnowledgeGraph& g, std::span<const NodeIndex> seeds, std::size_t hops) {
  constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.node_count(), kUnseen);
  std::deque<NodeIndex> frontier;
  for (NodeIndex s : seeds) {
    if (s >= g.node_count()) throw ValidationError("seed index out of range");
    if (dist[s] == kUnseen) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const NodeIndex u = frontier.front();
    frontier.pop_front();
    if (dist[u] == hops) continue;
    for (NodeIndex v : g.neighbors(u)) {
      if (dist[v] == kUnseen) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  Subgraph sub;
  std::vector<std::size_t> local(g.node_count(), kUnseen);
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    if (dist[i] == kUnseen) continue;
    local[i] = sub.nodes.size();
    sub.nodes.push_back(i);
    sub.distance.push_back(dist[i]);
  }
  sub.adjacency.resize(sub.nodes.size());
  for (std::size_t li = 0; li < sub.nodes.size(); ++li) {
    for (NodeIndex v : g.neighbors(sub.nodes[li])) {
      if (local[v] != kUnseen) sub.adjacency[li].push_back(local[v]);
    }
  }
  return sub;
}

namespace {

std::vector<double> pagerank(const Subgraph& sub, const PageRankOptions& opt) {
  const std::size_t n = sub.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> pr(n, inv_n);
  std::vector<double> next(n);
  for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (sub.adjacency[u].empty()) dangling += pr[u];
    }
    const double base = (1.0 - opt.damping) * inv_n + opt.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t u = 0; u < n; ++u) {
      if (sub.adjacency[u].empty()) continue;
      const double share = opt.damping * pr[u] / static_cast<double>(sub.adjacency[u].size());
      for (std::size_t v : sub.adjacency[u]) next[v] += share;
    }
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - pr[i]);
    pr.swap(next);
    if (change < opt.tolerance) break;
  }
  return pr;
}

// PageRank accumulates in local index order, and that order follows node
// insertion. Running it over a copy ordered by node key makes the scores
// bit-identical for any insertion order, so ties stay ties.
std::vector<double> keyed_pagerank(const KnowledgeGraph& g, const Subgraph& sub) {
  const std::size_t n = sub.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.node(sub.nodes[a]).key < g.node(sub.nodes[b]).key;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;
  Subgraph keyed;
  keyed.nodes.resize(n);
  keyed.distance.resize(n);
  keyed.adjacency.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    keyed.nodes[i] = sub.nodes[src];
    keyed.distance[i] = sub.distance[src];
    for (std::size_t v : sub.adjacency[src]) keyed.adjacency[i].push_back(rank[v]);
    std::sort(keyed.adjacency[i].begin(), keyed.adjacency[i].end());
  }
  const auto pr = pagerank(keyed, PageRankOptions{});
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = pr[rank[i]];
  return out;
}

void rank_and_truncate(std::vector<RecItem>& items, std::size_t top_n) {
  std::sort(items.begin(), items.end(), [](const RecItem& a, const RecItem& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.matched_entities.size() != b.matched_entities.size()) {
      return a.matched_entities.size() > b.matched_entities.size();
    }
    return a.doc_id < b.doc_id;
  });
  if (items.size() > top_n) items.resize(top_n);
}

}  // namespace

std::vector<double> centrality(const Subgraph& sub, Centrality measure, const PageRankOptions& options) {
  if (sub.empty()) throw ValidationError("centrality of an empty subgraph");
  if (measure == Centrality::PageRank) return pagerank(sub, options);
  std::vector<double> deg(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) deg[i] = static_cast<double>(sub.adjacency[i].size());
  return deg;
}

RankedRecommendation recommend(const KnowledgeGraph& g, const Query& q, Centrality measure,
                               std::size_t hops) {
  if (!g.frozen()) throw ValidationError("recommend requires a frozen graph");
  if (q.top_n < 1) throw ValidationError("top_n must be >= 1");
  RankedRecommendation rec;
  rec.query_id = q.id;
  rec.method = RecMethod::Propagation;
  rec.top_n = q.top_n;
  const auto seeds = match_entities(g, q);
  if (seeds.empty()) return rec;

  const Subgraph sub = khop_subgraph(g, seeds, hops);
  const auto scores = measure == Centrality::PageRank ? keyed_pagerank(g, sub) : centrality(sub, measure);
  const std::set<NodeIndex> seed_set(seeds.begin(), seeds.end());
  for (std::size_t li = 0; li < sub.size(); ++li) {
    const Node& n = g.node(sub.nodes[li]);
    if (!n.kind.is_document() || n.kind.doc_kind != q.target_kind) continue;
    if (q.exclude_doc && n.label == *q.exclude_doc) continue;
    RecItem item{n.label, scores[li], {}};
    for (NodeIndex e : g.neighbors(sub.nodes[li])) {
      if (seed_set.count(e)) item.matched_entities.push_back(g.node(e).label);
    }
    std::sort(item.matched_entities.begin(), item.matched_entities.end());
    rec.items.push_back(std::move(item));
  }
  rank_and_truncate(rec.items, q.top_n);
  return rec;
}

std::vector<DocumentEntities> document_entities(const KnowledgeGraph& g) {
  std::vector<DocumentEntities> out;
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    const Node& n = g.node(i);
    if (n.kind.is_document()) out.push_back(DocumentEntities{n.label, n.kind.doc_kind, g.entities_of(i)});
  }
  return out;
}

RankedRecommendation baseline_direct(const Query& q, const std::vector<DocumentEntities>& corpus,
                                     std::size_t top_n) {
  RankedRecommendation rec;
  rec.query_id = q.id;
  rec.method = RecMethod::Direct;
  rec.top_n = top_n;
  std::set<std::pair<EntityType, std::string>> wanted;
  for (const auto& e : q.entities.entities) wanted.emplace(e.etype, text::canonicalize(e.canonical));
  for (const auto& doc : corpus) {
    if (doc.kind != q.target_kind) continue;
    if (q.exclude_doc && doc.doc_id == *q.exclude_doc) continue;
    RecItem item{doc.doc_id, 0.0, {}};
    std::set<std::pair<EntityType, std::string>> seen;
    for (const auto& e : doc.entities.entities) {
      auto key = std::make_pair(e.etype, text::canonicalize(e.canonical));
      if (wanted.count(key) && seen.insert(key).second) item.matched_entities.push_back(key.second);
    }
    if (item.matched_entities.empty()) continue;
    item.score = static_cast<double>(item.matched_entities.size());
    std::sort(item.matched_entities.begin(), item.matched_entities.end());
    rec.items.push_back(std::move(item));
  }
  rank_and_truncate(rec.items, top_n);
  return rec;
}

RankedRecommendation baseline_random(const std::vector<std::string>& doc_ids, std::size_t top_n,
                                     std::uint64_t seed) {
  if (top_n > doc_ids.size()) {
    throw ValidationError("cannot sample " + std::to_string(top_n) + " of " +
                          std::to_string(doc_ids.size()) + " documents");
  }
  RankedRecommendation rec;
  rec.method = RecMethod::Random;
  rec.top_n = top_n;
  std::vector<std::string> pool = doc_ids;
  Rng rng(seed);
  for (std::size_t i = 0; i < top_n; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
    rec.items.push_back(RecItem{pool[i], static_cast<double>(top_n - i), {}});
  }
  return rec;
}

RecMetrics evaluate_recommendations(const std::vector<RankedRecommendation>& results,
                                    const std::map<std::string, JobArea>& labels) {
  auto label_of = [&](const std::string& id) {
    auto it = labels.find(id);
    if (it == labels.end()) throw ValidationError("missing label for '" + id + "'");
    return it->second;
  };
  RecMetrics m;
  for (const auto& r : results) {
    const JobArea want = label_of(r.query_id);
    QueryMetrics qm;
    qm.query_id = r.query_id;
    qm.top_n = r.top_n;
    qm.returned = r.items.size();
    for (const auto& item : r.items) {
      if (label_of(item.doc_id) == want) ++qm.hits;
    }
    qm.accuracy = qm.top_n ? static_cast<double>(qm.hits) / static_cast<double>(qm.top_n) : 0.0;
    qm.precision = qm.returned ? static_cast<double>(qm.hits) / static_cast<double>(qm.returned) : 0.0;
    m.avg_accuracy += qm.accuracy;
    m.avg_precision += qm.precision;
    m.per_query.push_back(std::move(qm));
  }
  if (!m.per_query.empty()) {
    m.avg_accuracy /= static_cast<double>(m.per_query.size());
    m.avg_precision /= static_cast<double>(m.per_query.size());
  }
  return m;
}

std::string render_recommendation_table(const std::vector<RecTableRow>& rows) {
  std::string out = "| N | Task | Avg. Acc. | Avg. Prec. |\n|---|---|---|---|\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.3f | %.3f", r.avg_accuracy, r.avg_precision);
    out += "| " + r.n + " | " + r.task + " | " + buf + " |\n";
  }
  return out;
}

std::string_view task_name(DocKind target_kind) {
  return target_kind == DocKind::JD ? "Job Rec." : "Employee Rec.";
}

}  // namespace hrkg
