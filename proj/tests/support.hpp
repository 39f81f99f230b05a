#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hrkg/extraction.hpp"
#include "hrkg/graph.hpp"
#include "hrkg/recommend.hpp"
#include "hrkg/rng.hpp"

namespace testsupport {

inline std::string fixture(const std::string& name) {
  std::ifstream in(std::filesystem::path(HRKG_FIXTURES) / name, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hrkg-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline hrkg::EntitySet entity_set(const std::string& doc_id,
                                  const std::vector<std::pair<std::string, hrkg::EntityType>>& items) {
  hrkg::EntitySet s;
  s.doc_id = doc_id;
  for (const auto& [c, t] : items) s.entities.push_back({c, c, t});
  return s;
}

inline hrkg::StoredEntitySet stored(const std::string& doc_id, hrkg::DocKind kind,
                                    std::optional<hrkg::JobArea> label,
                                    const std::vector<std::pair<std::string, hrkg::EntityType>>& items) {
  return {entity_set(doc_id, items), kind, label};
}

// Independent detectors for residual PII: any '@' surrounded by word
// characters and a dotted domain, or any run of 7+ digits allowing the
// usual separators.
inline std::size_t residual_pii(const std::string& s) {
  static const std::regex email(R"(\S+@\S+\.\w+)");
  static const std::regex phone(R"(\+?\(?\d[\d\s().-]{5,}\d)");
  std::size_t n = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), email); it != std::sregex_iterator(); ++it) ++n;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), phone); it != std::sregex_iterator(); ++it) {
    std::size_t digits = 0;
    for (char c : it->str()) digits += std::isdigit(static_cast<unsigned char>(c)) ? 1 : 0;
    if (digits >= 7) ++n;
  }
  return n;
}

/// Random entity store: `docs` documents over a pool of `terms` entity names
/// spread across two types. Documents get 0..max_entities entities.
inline std::vector<hrkg::StoredEntitySet> random_store(hrkg::Rng& rng, std::size_t docs, std::size_t terms,
                                                       std::size_t max_entities) {
  static const hrkg::EntityType kTypes[] = {hrkg::EntityType::Skill, hrkg::EntityType::Education,
                                            hrkg::EntityType::Experience};
  std::vector<hrkg::StoredEntitySet> store;
  for (std::size_t d = 0; d < docs; ++d) {
    const auto kind = rng.uniform_index(2) == 0 ? hrkg::DocKind::CV : hrkg::DocKind::JD;
    const auto area = hrkg::all_job_areas()[rng.uniform_index(hrkg::kJobAreaCount)];
    std::vector<std::pair<std::string, hrkg::EntityType>> items;
    const std::size_t k = rng.uniform_index(max_entities + 1);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t t = rng.uniform_index(terms);
      items.emplace_back("term " + std::to_string(t), kTypes[t % 3]);
    }
    store.push_back(stored((kind == hrkg::DocKind::CV ? "cv-" : "jd-") + std::to_string(d), kind, area, items));
  }
  return store;
}

/// Level-set BFS over the full graph, written against the public adjacency
/// only. Returns node -> distance for nodes within `hops`.
inline std::map<hrkg::NodeIndex, std::size_t> bfs_levels(const hrkg::KnowledgeGraph& g,
                                                        const std::vector<hrkg::NodeIndex>& seeds,
                                                        std::size_t hops) {
  std::map<hrkg::NodeIndex, std::size_t> dist;
  std::set<hrkg::NodeIndex> level(seeds.begin(), seeds.end());
  for (auto s : level) dist[s] = 0;
  for (std::size_t d = 1; d <= hops && !level.empty(); ++d) {
    std::set<hrkg::NodeIndex> next;
    for (auto u : level) {
      for (hrkg::NodeIndex v = 0; v < g.node_count(); ++v) {
        const auto& nb = g.neighbors(u);
        if (std::find(nb.begin(), nb.end(), v) != nb.end() && !dist.count(v)) next.insert(v);
      }
    }
    for (auto v : next) dist[v] = d;
    level = std::move(next);
  }
  return dist;
}

/// Brute-force degree-centrality recommender: seeds by scanning every node,
/// BFS level sets, induced degree counting, full sort by the documented
/// order (score desc, matched count desc, doc_id asc).
inline hrkg::RankedRecommendation oracle_recommend(const hrkg::KnowledgeGraph& g, const hrkg::Query& q,
                                                   std::size_t hops) {
  hrkg::RankedRecommendation rec;
  rec.query_id = q.id;
  rec.top_n = q.top_n;
  std::vector<hrkg::NodeIndex> seeds;
  for (hrkg::NodeIndex i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(i);
    if (!n.kind.is_entity()) continue;
    for (const auto& e : q.entities.entities) {
      if (e.etype == n.kind.etype && e.canonical == n.label) {
        seeds.push_back(i);
        break;
      }
    }
  }
  if (seeds.empty()) return rec;
  const auto dist = bfs_levels(g, seeds, hops);
  const std::set<hrkg::NodeIndex> seed_set(seeds.begin(), seeds.end());
  for (const auto& [v, d] : dist) {
    const auto& n = g.node(v);
    if (!n.kind.is_document() || n.kind.doc_kind != q.target_kind) continue;
    if (q.exclude_doc && *q.exclude_doc == n.label) continue;
    hrkg::RecItem item;
    item.doc_id = n.label;
    for (const auto& [u, du] : dist) {
      const auto& nb = g.neighbors(v);
      if (std::find(nb.begin(), nb.end(), u) != nb.end()) {
        item.score += 1.0;
        if (seed_set.count(u)) item.matched_entities.push_back(g.node(u).label);
      }
    }
    std::sort(item.matched_entities.begin(), item.matched_entities.end());
    rec.items.push_back(item);
  }
  std::sort(rec.items.begin(), rec.items.end(), [](const hrkg::RecItem& a, const hrkg::RecItem& b) {
    return std::make_tuple(-a.score, -static_cast<long>(a.matched_entities.size()), a.doc_id) <
           std::make_tuple(-b.score, -static_cast<long>(b.matched_entities.size()), b.doc_id);
  });
  if (rec.items.size() > q.top_n) rec.items.resize(q.top_n);
  return rec;
}

/// Random connected-ish subgraph of at most max_nodes nodes for centrality
/// checks, built directly as local adjacency lists.
inline hrkg::Subgraph random_subgraph(hrkg::Rng& rng, std::size_t max_nodes) {
  hrkg::Subgraph s;
  const std::size_t n = 1 + rng.uniform_index(max_nodes);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  const double p = rng.uniform(0.02, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform01() < p) edges.emplace(i, j);
    }
  }
  s.nodes.resize(n);
  s.distance.assign(n, 0);
  s.adjacency.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.nodes[i] = i;
  for (auto [i, j] : edges) {
    s.adjacency[i].push_back(j);
    s.adjacency[j].push_back(i);
  }
  return s;
}

/// Dense power iteration on the Google matrix G = d * M + (1 - d) / n * 11^T
/// where dangling columns of M are uniform. Iterates to 1e-15.
inline std::vector<double> oracle_pagerank(const hrkg::Subgraph& s, double d = 0.85) {
  const std::size_t n = s.size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (s.adjacency[j].empty()) {
      for (std::size_t i = 0; i < n; ++i) m[i * n + j] = 1.0 / static_cast<double>(n);
    } else {
      for (std::size_t i : s.adjacency[j]) m[i * n + j] += 1.0 / static_cast<double>(s.adjacency[j].size());
    }
  }
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += (d * m[i * n + j] + (1.0 - d) / static_cast<double>(n)) * x[j];
      y[i] = acc;
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(y[i] - x[i]));
    x = std::move(y);
    if (diff < 1e-15) break;
  }
  return x;
}

}  // namespace testsupport
