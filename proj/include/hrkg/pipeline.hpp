#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hrkg/corpus.hpp"
#include "hrkg/embedding.hpp"
#include "hrkg/extraction.hpp"
#include "hrkg/gnn.hpp"
#include "hrkg/graph.hpp"
#include "hrkg/llm_client.hpp"
#include "hrkg/recommend.hpp"
#include "hrkg/tfidf.hpp"

namespace hrkg {

struct IngestOptions {
  RefineOptions refine;
  bool scrub = true;
  std::vector<std::string> pii_names;
};

struct IngestFailure {
  std::string doc_id;
  std::string message;
};

struct IngestResult {
  /// Successful documents in corpus order.
  std::vector<StoredEntitySet> store;
  std::vector<IngestFailure> failures;
  std::size_t pii_removed = 0;
};

/// Scrub, gazetteer-extract and refine every document.
IngestResult ingest_gazetteer(const Corpus& corpus, const Gazetteer& gazetteer,
                              const IngestOptions& options = {});

/// Same with the LLM extractor; per-document failures are collected, not thrown.
IngestResult ingest_llm(const Corpus& corpus, const LlmClient& client,
                        const IngestOptions& options = {});

/// build_graph plus node features when a provider is given; the result is frozen.
KnowledgeGraph build_knowledge_graph(const std::vector<StoredEntitySet>& store,
                                     const EmbeddingProvider* provider);

/// doc_id -> job area for every labelled document node.
std::map<std::string, JobArea> document_areas(const KnowledgeGraph& g);

struct RecExperimentConfig {
  std::vector<std::size_t> top_ns{2, 5, 10};
  std::size_t hops = kDefaultHops;
  Centrality measure = Centrality::Degree;
  /// List length for the direct (D) and random (R) baseline rows.
  std::size_t baseline_n = 5;
  std::uint64_t seed = 42;
  bool baselines = true;
};

struct RecExperimentTask {
  DocKind target = DocKind::JD;
  /// One entry per top_n, aligned with the config.
  std::vector<RecMetrics> propagation;
  std::optional<RecMetrics> direct;
  std::optional<RecMetrics> random;
  /// Propagation results at the largest top_n.
  std::vector<RankedRecommendation> results;
  std::vector<RankedRecommendation> direct_results;
  std::vector<RankedRecommendation> random_results;
};

struct RecExperimentResult {
  std::vector<RecExperimentTask> tasks;
  /// Rows N..., D, R per task.
  std::vector<RecTableRow> rows;
};

/// One query per labelled document against the opposite kind: CVs query
/// JDs first, then JDs query CVs.
std::vector<Query> all_document_queries(const KnowledgeGraph& g, std::size_t top_n);

/// Propagation at every N plus the baselines, per target kind ("Job Rec."
/// for JD targets, "Employee Rec." for CV targets). Metrics average over
/// queries with a known category; rows come out grouped by N then task.
RecExperimentResult run_recommendation_experiment(const KnowledgeGraph& g,
                                                  const std::vector<Query>& queries,
                                                  const RecExperimentConfig& cfg = {});
/// Same over all_document_queries(g).
RecExperimentResult run_recommendation_experiment(const KnowledgeGraph& g,
                                                  const RecExperimentConfig& cfg = {});

struct ClsExperimentConfig {
  GnnShape shape;
  TrainConfig train;
  std::uint64_t split_seed = 42;
  bool gcn = true;
  bool gat = true;
  bool tfidf = true;
  TfidfBaselineConfig tfidf_cfg;
};

struct ClsExperimentResult {
  Split split;
  /// Accuracy of always predicting the most frequent training class.
  double majority_accuracy = 0.0;
  std::optional<TrainResult> gcn;
  std::optional<TrainResult> gat;
  std::optional<ClsMetrics> tfidf;
  /// Test-split rows in GCN, GAT, TF-IDF order.
  std::vector<ClsRow> rows;
};

/// Stratified split over labelled document nodes, then the selected models.
/// TF-IDF needs the corpus for document text; it is skipped when absent.
ClsExperimentResult run_classification_experiment(const KnowledgeGraph& g, const Corpus* corpus,
                                                  const ClsExperimentConfig& cfg);

/// Reference rows (not reproduced) from the original study, for reports.
std::vector<RecTableRow> reference_recommendation_rows();
std::vector<ClsRow> reference_classification_rows();

}  // namespace hrkg
