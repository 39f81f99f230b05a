#include <doctest.h>

#include "hrkg/config.hpp"
#include "hrkg/error.hpp"
#include "hrkg/pipeline.hpp"
#include "support.hpp"

using namespace hrkg;

namespace {

Corpus small_corpus() {
  SynthParams p;
  p.docs_per_category = 2;
  p.seed = 5;
  return synth_corpus(p);
}

}  // namespace

TEST_CASE("gazetteer ingest keeps corpus order and counts redactions") {
  std::vector<Document> docs = {
      {"cv-1", DocKind::CV, "Python and SQL, mail me at x@y.org", JobArea::InformationTechnology, {}},
      {"jd-1", DocKind::JD, "Needs Excel and SAP", JobArea::Finance, {}},
  };
  const Corpus corpus(docs, Provenance::Loaded);
  Gazetteer gz;
  gz.add("Python", EntityType::Skill);
  gz.add("SQL", EntityType::Skill);
  gz.add("Excel", EntityType::Skill);
  gz.add("SAP", EntityType::Skill);
  const auto res = ingest_gazetteer(corpus, gz);
  REQUIRE(res.store.size() == 2);
  CHECK(res.store[0].set.doc_id == "cv-1");
  CHECK(res.store[0].set.entities.size() == 2);
  CHECK(res.store[1].label == JobArea::Finance);
  CHECK(res.pii_removed == 1);
  CHECK(res.failures.empty());
  CHECK_THROWS_AS(ingest_gazetteer(corpus, Gazetteer{}), ConfigError);
}

TEST_CASE("knowledge graph build attaches features and freezes") {
  const Config c;
  const Corpus corpus = small_corpus();
  const auto ing = ingest_gazetteer(corpus, make_configured_gazetteer(c));
  CHECK(ing.store.size() == corpus.size());
  const auto provider = make_embedding_provider(c);
  const auto g = build_knowledge_graph(ing.store, provider.get());
  CHECK(g.frozen());
  REQUIRE(g.features().has_value());
  CHECK(g.features()->rows() == g.node_count());
  CHECK(document_areas(g).size() == corpus.size());
  CHECK_FALSE(build_knowledge_graph(ing.store, nullptr).features().has_value());
}

TEST_CASE("recommendation experiment rows come grouped by list length") {
  const Config c;
  const Corpus corpus = small_corpus();
  const auto g = build_knowledge_graph(ingest_gazetteer(corpus, make_configured_gazetteer(c)).store, nullptr);
  const auto queries = all_document_queries(g, 5);
  CHECK(queries.size() == corpus.size());
  CHECK(queries.front().target_kind == DocKind::JD);
  CHECK(queries.back().target_kind == DocKind::CV);
  const auto res = run_recommendation_experiment(g);
  std::vector<std::string> keys;
  for (const auto& r : res.rows) keys.push_back(r.n + "/" + r.task);
  CHECK(keys == std::vector<std::string>{"2/Job Rec.", "2/Employee Rec.", "5/Job Rec.", "5/Employee Rec.",
                                         "10/Job Rec.", "10/Employee Rec.", "D/Job Rec.", "D/Employee Rec.",
                                         "R/Job Rec.", "R/Employee Rec."});
  for (const auto& r : res.rows) {
    CHECK(r.avg_accuracy >= 0.0);
    CHECK(r.avg_accuracy <= 1.0);
    CHECK(r.avg_precision <= 1.0);
  }
  RecExperimentConfig rc;
  rc.top_ns = {3};
  rc.baselines = false;
  CHECK(run_recommendation_experiment(g, rc).rows.size() == 2);
}

TEST_CASE("classification experiment rows and majority baseline") {
  Config c;
  c.gnn.epochs = 5;
  c.gnn.hidden_dim = 8;
  c.gnn.n_layers = 2;
  const Corpus corpus = small_corpus();
  const auto provider = make_embedding_provider(c);
  const auto g = build_knowledge_graph(ingest_gazetteer(corpus, make_configured_gazetteer(c)).store, provider.get());
  const auto res = run_classification_experiment(g, &corpus, classification_config(c));
  REQUIRE(res.rows.size() == 3);
  CHECK(res.rows[0].model == "GCN");
  CHECK(res.rows[1].model == "GAT");
  CHECK(res.rows[2].model == "Tfidf+LogR.");
  // Balanced classes: the majority guess hits one class of twenty.
  CHECK(res.majority_accuracy == doctest::Approx(1.0 / 20.0));
  CHECK(res.gcn->history.size() == 5);

  auto no_text = classification_config(c);
  no_text.gat = false;
  CHECK(run_classification_experiment(g, nullptr, no_text).rows.size() == 1);
}

TEST_CASE("reference rows match the published tables") {
  const auto rec = reference_recommendation_rows();
  REQUIRE(rec.size() == 10);
  CHECK(rec[2].n == "5");
  CHECK(rec[2].avg_accuracy == 0.748);
  CHECK(rec[2].avg_precision == 0.764);
  const auto cls = reference_classification_rows();
  REQUIRE(cls.size() == 8);
  CHECK(cls[0].model == "Tfidf+LogR.");
  CHECK(cls[0].metrics == ClsMetrics{0.745, 0.770, 0.740});
  CHECK(cls[6].model == "GCN");
  CHECK(cls[6].metrics == ClsMetrics{0.785, 0.800, 0.795});
  CHECK(cls[7].metrics == ClsMetrics{0.775, 0.835, 0.775});
}

TEST_CASE("config json round trip and rejection") {
  Config c;
  c.top_n = 7;
  c.gnn.optimizer = Optimizer::GD;
  c.synth.seed = 9;
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.top_n == 7);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"recommend", {{"top_n", "many"}}}}), ConfigError);
  CHECK(config_from_json(nlohmann::json::object()).hops == kDefaultHops);
}
