#include "hrkg/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "hrkg/corpus.hpp"
#include "hrkg/error.hpp"
#include "hrkg/graph_io.hpp"
#include "hrkg/pipeline.hpp"
#include "hrkg/text.hpp"

namespace hrkg::cli {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string corpus_digest(const Corpus& corpus) { return text::hex64(text::fnv1a64(to_jsonl(corpus))); }

ordered_json to_json(const RankedRecommendation& r) {
  ordered_json j;
  j["query_id"] = r.query_id;
  j["method"] = to_string(r.method);
  j["top_n"] = r.top_n;
  j["items"] = ordered_json::array();
  for (const auto& it : r.items) {
    j["items"].push_back({{"doc_id", it.doc_id}, {"score", it.score}, {"matched_entities", it.matched_entities}});
  }
  return j;
}

std::string recommendation_csv(const std::vector<RecTableRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "n,task,avg_accuracy,avg_precision\n";
  for (const auto& r : rows) os << r.n << ',' << r.task << ',' << r.avg_accuracy << ',' << r.avg_precision << '\n';
  return os.str();
}

ordered_json to_json(const RunReport& r) {
  ordered_json j;
  j["config"] = r.config;
  j["corpus_digest"] = r.corpus_digest;
  j["documents"] = r.documents;
  j["graph"] = {{"nodes", r.graph.nodes},
                {"edges", r.graph.edges},
                {"node_kinds", r.graph.node_kinds},
                {"edge_kinds", r.graph.edge_kinds},
                {"components", r.graph.components}};
  j["recommendation"] = ordered_json::array();
  for (const auto& row : r.recommendation) {
    j["recommendation"].push_back(
        {{"n", row.n}, {"task", row.task}, {"avg_accuracy", row.avg_accuracy}, {"avg_precision", row.avg_precision}});
  }
  j["classification"] = ordered_json::array();
  for (const auto& row : r.classification) {
    j["classification"].push_back({{"model", row.model},
                                   {"accuracy", row.metrics.accuracy},
                                   {"precision", row.metrics.precision},
                                   {"recall", row.metrics.recall}});
  }
  j["majority_accuracy"] = r.majority_accuracy;
  j["timing_s"] = ordered_json::object();
  for (const auto& [stage, s] : r.timing) j["timing_s"][stage] = s;
  return j;
}

std::string render_markdown(const RunReport& r) {
  std::ostringstream os;
  os << "# Run report\n\n";
  os << "- corpus digest: `" << r.corpus_digest << "` (" << r.documents << " documents)\n";
  os << "- graph: " << r.graph.nodes << " nodes, " << r.graph.edges << " edges, connected components: "
     << r.graph.components << "\n";
  os << "- seeds: synth " << r.config["synth"]["seed"] << ", split " << r.config["seeds"]["split"] << ", train "
     << r.config["seeds"]["train"] << ", random baseline " << r.config["seeds"]["random_baseline"] << "\n\n";
  if (!r.recommendation.empty()) {
    os << "## Recommendation\n\n" << render_recommendation_table(r.recommendation) << "\n";
  }
  if (!r.classification.empty()) {
    os << "## Job area classification (test split)\n\n"
       << render_classification_table(r.classification) << "\nMajority-class accuracy: " << std::fixed
       << std::setprecision(3) << r.majority_accuracy << "\n\n";
  }
  os << "## Published reference values\n\n"
     << "Measured on a private 200 CV / 200 JD corpus that is not distributed; listed for comparison only.\n\n"
     << render_recommendation_table(reference_recommendation_rows()) << "\n";
  const auto cls_ref = reference_classification_rows();
  os << render_classification_table(cls_ref) << "\n";
  os << "## Timing\n\n";
  for (const auto& [stage, s] : r.timing) os << "- " << stage << ": " << std::fixed << std::setprecision(3) << s << " s\n";
  return os.str();
}

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary);
    if (!o) throw Error(path.string() + ": cannot open for writing");
    o << content;
    if (!o) throw Error(path.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

GraphFormat format_for(const fs::path& path) {
  const auto ext = text::to_lower(path.extension().string());
  if (ext == ".graphml" || ext == ".xml") return GraphFormat::GraphML;
  if (ext == ".dot" || ext == ".gv") return GraphFormat::Dot;
  if (ext == ".jsonl") return GraphFormat::Jsonl;
  throw UsageError(path.string() + ": cannot infer graph format from extension (valid: .graphml, .dot, .jsonl)");
}

// Tracks a value bound to a flag so it only overrides the config when given.
template <typename T>
struct Flag {
  T value{};
  CLI::Option* opt = nullptr;
  bool set() const { return opt && opt->count() > 0; }
  void apply(T& into) const {
    if (set()) into = value;
  }
};

template <typename T>
CLI::Option* flag_option(CLI::App* app, const std::string& name, Flag<T>& f, const std::string& desc) {
  f.opt = app->add_option(name, f.value, desc);
  return f.opt;
}

const std::vector<std::string> kFormats{"graphml", "dot", "jsonl"};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

fs::path features_stem(const fs::path& graph_path) {
  return graph_path.parent_path() / (graph_path.stem().string() + ".features");
}

std::string sidecar_reference(const fs::path& graph_path) { return graph_path.stem().string() + ".features"; }

void write_graph_with_features(const KnowledgeGraph& g, const fs::path& out, GraphFormat fmt) {
  std::string sidecar;
  if (g.features() && fmt != GraphFormat::Dot) {
    save_feature_matrix(*g.features(), features_stem(out));
    sidecar = sidecar_reference(out);
  }
  write_atomic(out, export_graph(g, fmt, sidecar));
}

std::vector<Query> load_queries(const KnowledgeGraph& g, const fs::path& path, std::size_t top_n) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::vector<Query> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where + e.what());
    }
    try {
      std::optional<DocKind> target;
      if (j.contains("target")) target = parse_doc_kind(j.at("target").get<std::string>());
      const std::size_t n = j.value("top_n", top_n);
      if (j.contains("doc_id")) {
        out.push_back(query_for_document(g, j.at("doc_id").get<std::string>(), n, target));
        continue;
      }
      Query q;
      q.id = j.at("id").get<std::string>();
      q.entities.doc_id = q.id;
      for (const auto& e : j.at("entities")) {
        const auto canonical = text::canonicalize(e.at("canonical").get<std::string>());
        q.entities.entities.push_back({canonical, canonical, parse_entity_type(e.at("type").get<std::string>())});
      }
      q.target_kind = target.value_or(DocKind::JD);
      q.top_n = n;
      if (j.contains("area")) q.area = parse_job_area(j.at("area").get<std::string>());
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw ParseError(where + e.what());
    } catch (const Error& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

struct Common {
  std::string config_path;
};

Config base_config(const Common& common) {
  return common.config_path.empty() ? Config{} : load_config(common.config_path);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge graphs from CVs and job descriptions: extraction, recommendation, classification.",
               "hrkg"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);

  std::function<int()> action;

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic corpus");
  std::string synth_out;
  Flag<std::uint64_t> synth_seed;
  Flag<std::size_t> synth_docs;
  Flag<double> synth_overlap;
  Flag<std::size_t> synth_terms;
  synth->add_option("-o,--out", synth_out, "Output corpus (.jsonl or .csv)")->required();
  flag_option(synth, "--seed", synth_seed, "Generator seed");
  flag_option(synth, "--docs-per-category", synth_docs, "CVs and JDs per job area");
  flag_option(synth, "--overlap", synth_overlap, "Fraction of terms drawn from other categories")->check(CLI::Range(0.0, 1.0));
  flag_option(synth, "--terms-per-doc", synth_terms, "Entity terms embedded per document");
  synth->callback([&] {
    action = [&] {
      Config c = base_config(common);
      synth_seed.apply(c.synth.seed);
      synth_docs.apply(c.synth.docs_per_category);
      synth_overlap.apply(c.synth.cross_category_overlap);
      synth_terms.apply(c.synth.terms_per_doc);
      const Corpus corpus = synth_corpus(c.synth);
      const fs::path path(synth_out);
      if (corpus_format_from_path(path) == CorpusFormat::Csv) {
        save_corpus(corpus, path);
      } else {
        write_atomic(path, to_jsonl(corpus));
      }
      out << "wrote " << corpus.size() << " documents to " << synth_out << " (digest " << corpus_digest(corpus)
          << ")\n";
      return kExitOk;
    };
  });

  // ingest -----------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Scrub PII, extract and refine entities into an entity store");
  std::string ingest_corpus;
  std::string ingest_out;
  std::string ingest_failures;
  Flag<std::string> ingest_extractor;
  Flag<std::string> ingest_gaz;
  Flag<std::size_t> ingest_max_words;
  Flag<std::string> ingest_names;
  Flag<std::string> ingest_audit;
  Flag<std::string> ingest_endpoint;
  Flag<std::string> ingest_model;
  Flag<std::string> ingest_key_env;
  bool ingest_no_scrub = false;
  ingest->add_option("--corpus", ingest_corpus, "Corpus file (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--out", ingest_out, "Entity store (.jsonl)")->required();
  ingest->add_option("--failures", ingest_failures, "Failure manifest path (default <out>.failures.jsonl)");
  flag_option(ingest, "--extractor", ingest_extractor, "gazetteer or llm")
      ->check(CLI::IsMember({"gazetteer", "llm"}, CLI::ignore_case));
  flag_option(ingest, "--gazetteer", ingest_gaz, "Gazetteer JSONL ({type, term} lines)");
  flag_option(ingest, "--max-words", ingest_max_words, "Drop entities longer than this many words");
  flag_option(ingest, "--names", ingest_names, "File of personal names to redact, one per line");
  flag_option(ingest, "--audit-log", ingest_audit, "Append LLM requests and replies to this JSONL file");
  flag_option(ingest, "--llm-endpoint", ingest_endpoint, "Chat-completion URL");
  flag_option(ingest, "--llm-model", ingest_model, "Model name sent to the endpoint");
  flag_option(ingest, "--llm-key-env", ingest_key_env, "Environment variable holding the API key");
  ingest->add_flag("--no-scrub", ingest_no_scrub, "Skip PII scrubbing");
  ingest->callback([&] {
    action = [&] {
      Config c = base_config(common);
      if (ingest_extractor.set()) {
        c.extractor = text::to_lower(ingest_extractor.value) == "llm" ? ExtractorKind::Llm : ExtractorKind::Gazetteer;
      }
      ingest_gaz.apply(c.gazetteer);
      ingest_max_words.apply(c.max_words);
      ingest_names.apply(c.pii_names);
      if (ingest_audit.set()) c.audit_log = ingest_audit.value;
      ingest_endpoint.apply(c.llm.endpoint);
      ingest_model.apply(c.llm.model);
      ingest_key_env.apply(c.llm.api_key_env);
      if (ingest_no_scrub) c.scrub_pii = false;

      IngestOptions opts;
      opts.refine.max_words = c.max_words;
      opts.scrub = c.scrub_pii;
      if (!c.pii_names.empty()) opts.pii_names = load_name_list(c.pii_names);

      // Build the extractor before reading the corpus so configuration
      // problems surface without doing any work.
      std::optional<LlmClient> client;
      std::optional<Gazetteer> gazetteer;
      if (c.extractor == ExtractorKind::Llm) {
        client.emplace(llm_client_config(c));
      } else {
        gazetteer.emplace(make_configured_gazetteer(c));
      }
      const fs::path corpus_path(ingest_corpus);
      const Corpus corpus = load_corpus(corpus_path, corpus_format_from_path(corpus_path));
      const IngestResult res = client ? ingest_llm(corpus, *client, opts) : ingest_gazetteer(corpus, *gazetteer, opts);

      std::string store;
      std::size_t entities = 0;
      for (const auto& s : res.store) {
        store += to_jsonl_line(s) + "\n";
        entities += s.set.entities.size();
      }
      write_atomic(ingest_out, store);
      out << "ingested " << res.store.size() << "/" << corpus.size() << " documents, " << entities
          << " entities, " << res.pii_removed << " PII spans redacted\n";
      if (!res.failures.empty()) {
        const fs::path manifest = ingest_failures.empty() ? fs::path(ingest_out + ".failures.jsonl") : fs::path(ingest_failures);
        std::string lines;
        for (const auto& f : res.failures) lines += ordered_json{{"doc_id", f.doc_id}, {"error", f.message}}.dump() + "\n";
        write_atomic(manifest, lines);
        err << "error: " << res.failures.size() << " documents failed; see " << manifest.string() << "\n";
        return kExitDomain;
      }
      return kExitOk;
    };
  });

  // build ------------------------------------------------------------------
  auto* build = app.add_subcommand("build", "Build the knowledge graph and node features from an entity store");
  std::string build_store;
  std::string build_out;
  Flag<std::string> build_embedding;
  Flag<std::size_t> build_dim;
  build->add_option("--store", build_store, "Entity store (.jsonl)")->required()->check(CLI::ExistingFile);
  build->add_option("-o,--out", build_out, "Graph file (.graphml or .jsonl)")->required();
  flag_option(build, "--embedding", build_embedding, "hash, remote or none")
      ->check(CLI::IsMember({"hash", "remote", "none"}, CLI::ignore_case));
  flag_option(build, "--feature-dim", build_dim, "Feature vector length");
  build->callback([&] {
    action = [&] {
      Config c = base_config(common);
      if (build_embedding.set()) {
        json j = to_json(c);
        j["embedding"]["provider"] = text::to_lower(build_embedding.value);
        c = config_from_json(j);
      }
      build_dim.apply(c.embedding.feature_dim);
      const fs::path path(build_out);
      const GraphFormat fmt = format_for(path);
      if (fmt == GraphFormat::Dot) throw UsageError("build writes graphml or jsonl; use export for dot");
      const auto provider = make_embedding_provider(c);
      const auto store = load_entity_store(build_store);
      if (store.empty()) err << "warning: entity store is empty; writing an empty graph\n";
      const KnowledgeGraph g = build_knowledge_graph(store, provider.get());
      write_graph_with_features(g, path, fmt);
      const auto s = stats(g);
      ordered_json j{{"nodes", s.nodes},
                     {"edges", s.edges},
                     {"node_kinds", s.node_kinds},
                     {"edge_kinds", s.edge_kinds},
                     {"max_degree", s.max_degree},
                     {"components", s.components}};
      out << j.dump() << "\n";
      return kExitOk;
    };
  });

  // recommend --------------------------------------------------------------
  auto* rec = app.add_subcommand("recommend", "Rank documents by entity match, k-hop expansion and centrality");
  std::string rec_graph;
  std::string rec_queries;
  std::string rec_out;
  std::string rec_report;
  std::string rec_csv;
  std::string rec_baseline = "none";
  bool rec_full = false;
  Flag<std::size_t> rec_top;
  Flag<std::size_t> rec_k;
  Flag<std::string> rec_measure;
  Flag<std::uint64_t> rec_seed;
  rec->add_option("--graph", rec_graph, "Graph file")->required()->check(CLI::ExistingFile);
  rec->add_option("--queries", rec_queries, "Query JSONL; default: every labelled document queries the opposite kind")
      ->check(CLI::ExistingFile);
  rec->add_option("-o,--out", rec_out, "Results JSONL");
  rec->add_option("--report", rec_report, "Markdown table output");
  rec->add_option("--csv", rec_csv, "CSV table output");
  rec->add_option("--baseline", rec_baseline, "none, direct, random or both")
      ->check(CLI::IsMember({"none", "direct", "random", "both"}, CLI::ignore_case));
  rec->add_flag("--full-table", rec_full, "Rows for N = 2, 5, 10 plus direct (D) and random (R) baselines");
  flag_option(rec, "--top-n", rec_top, "List length")->check(CLI::PositiveNumber);
  flag_option(rec, "--k", rec_k, "Hop count for subgraph expansion");
  flag_option(rec, "--measure", rec_measure, "degree or pagerank")
      ->check(CLI::IsMember({"degree", "pagerank"}, CLI::ignore_case));
  flag_option(rec, "--seed", rec_seed, "Random baseline seed");
  rec->callback([&] {
    action = [&] {
      Config c = base_config(common);
      rec_top.apply(c.top_n);
      rec_k.apply(c.hops);
      if (rec_measure.set()) c.centrality = parse_centrality(rec_measure.value);
      rec_seed.apply(c.seeds.random_baseline);
      const std::string baseline = text::to_lower(rec_baseline);

      const KnowledgeGraph g = load_graph(rec_graph);
      const auto queries = rec_queries.empty() ? all_document_queries(g, c.top_n) : load_queries(g, rec_queries, c.top_n);

      RecExperimentConfig rc;
      rc.hops = c.hops;
      rc.measure = c.centrality;
      rc.seed = c.seeds.random_baseline;
      rc.baseline_n = c.top_n;
      rc.top_ns = rec_full ? std::vector<std::size_t>{2, 5, 10} : std::vector<std::size_t>{c.top_n};
      rc.baselines = rec_full || baseline != "none";
      const auto res = run_recommendation_experiment(g, queries, rc);

      std::vector<RecTableRow> rows;
      for (const auto& r : res.rows) {
        if (rec_full || r.n != "D" || baseline == "direct" || baseline == "both") {
          if (rec_full || r.n != "R" || baseline == "random" || baseline == "both") rows.push_back(r);
        }
      }

      if (!rec_out.empty()) {
        std::string lines;
        for (const auto& q : queries) lines += to_json(recommend(g, q, c.centrality, c.hops)).dump() + "\n";
        for (const auto& t : res.tasks) {
          if (baseline == "direct" || baseline == "both" || rec_full) {
            for (const auto& r : t.direct_results) lines += to_json(r).dump() + "\n";
          }
          if (baseline == "random" || baseline == "both" || rec_full) {
            for (const auto& r : t.random_results) lines += to_json(r).dump() + "\n";
          }
        }
        write_atomic(rec_out, lines);
      }
      const std::string table = render_recommendation_table(rows);
      if (!rec_report.empty()) write_atomic(rec_report, table);
      if (!rec_csv.empty()) write_atomic(rec_csv, recommendation_csv(rows));
      out << table;
      return kExitOk;
    };
  });

  // classify ---------------------------------------------------------------
  auto* cls = app.add_subcommand("classify", "Train GCN/GAT job-area classifiers and optional TF-IDF baseline");
  std::string cls_graph;
  std::string cls_corpus;
  std::string cls_arch = "both";
  std::string cls_baseline = "none";
  std::string cls_out;
  std::string cls_report;
  std::string cls_checkpoints;
  std::string cls_history;
  Flag<std::size_t> cls_epochs;
  Flag<double> cls_lr;
  Flag<double> cls_wd;
  Flag<std::string> cls_opt;
  Flag<std::size_t> cls_hidden;
  Flag<std::size_t> cls_layers;
  Flag<std::size_t> cls_heads;
  Flag<std::uint64_t> cls_seed;
  Flag<std::uint64_t> cls_split_seed;
  cls->add_option("--graph", cls_graph, "Graph file with node features")->required()->check(CLI::ExistingFile);
  cls->add_option("--corpus", cls_corpus, "Corpus with document text (needed by the TF-IDF baseline)")
      ->check(CLI::ExistingFile);
  cls->add_option("--arch", cls_arch, "gcn, gat, both or none")
      ->check(CLI::IsMember({"gcn", "gat", "both", "none"}, CLI::ignore_case));
  cls->add_option("--baseline", cls_baseline, "tfidf or none")->check(CLI::IsMember({"tfidf", "none"}, CLI::ignore_case));
  cls->add_option("-o,--out", cls_out, "Metrics CSV");
  cls->add_option("--report", cls_report, "Markdown table output");
  cls->add_option("--checkpoint-dir", cls_checkpoints, "Save trained models here");
  cls->add_option("--history", cls_history, "Per-epoch loss/accuracy CSV");
  flag_option(cls, "--epochs", cls_epochs, "Training epochs");
  flag_option(cls, "--lr", cls_lr, "Learning rate");
  flag_option(cls, "--weight-decay", cls_wd, "L2 weight decay");
  flag_option(cls, "--optimizer", cls_opt, "gd or adam")->check(CLI::IsMember({"gd", "adam"}, CLI::ignore_case));
  flag_option(cls, "--hidden", cls_hidden, "Hidden width");
  flag_option(cls, "--layers", cls_layers, "Layer count");
  flag_option(cls, "--heads", cls_heads, "GAT attention heads");
  flag_option(cls, "--seed", cls_seed, "Initialisation seed");
  flag_option(cls, "--split-seed", cls_split_seed, "Train/val/test split seed");
  cls->callback([&] {
    action = [&] {
      Config c = base_config(common);
      cls_epochs.apply(c.gnn.epochs);
      cls_lr.apply(c.gnn.learning_rate);
      cls_wd.apply(c.gnn.weight_decay);
      if (cls_opt.set()) c.gnn.optimizer = parse_optimizer(cls_opt.value);
      cls_hidden.apply(c.gnn.hidden_dim);
      cls_layers.apply(c.gnn.n_layers);
      cls_heads.apply(c.gnn.n_heads);
      cls_seed.apply(c.seeds.train);
      cls_split_seed.apply(c.seeds.split);
      const std::string arch = text::to_lower(cls_arch);
      const bool tfidf = text::to_lower(cls_baseline) == "tfidf";
      if (tfidf && cls_corpus.empty()) throw UsageError("--baseline tfidf needs --corpus for document text");
      if (arch == "none" && !tfidf) throw UsageError("nothing to do: --arch none without --baseline tfidf");

      ClsExperimentConfig ec = classification_config(c);
      ec.gcn = arch == "gcn" || arch == "both";
      ec.gat = arch == "gat" || arch == "both";
      ec.tfidf = tfidf;
      const KnowledgeGraph g = load_graph(cls_graph);
      std::optional<Corpus> corpus;
      if (!cls_corpus.empty()) corpus = load_corpus(cls_corpus, corpus_format_from_path(cls_corpus));
      const auto res = run_classification_experiment(g, corpus ? &*corpus : nullptr, ec);

      if (!cls_checkpoints.empty()) {
        fs::create_directories(cls_checkpoints);
        if (res.gcn) save_checkpoint(res.gcn->model, c.seeds.train, fs::path(cls_checkpoints) / "gcn");
        if (res.gat) save_checkpoint(res.gat->model, c.seeds.train, fs::path(cls_checkpoints) / "gat");
      }
      if (!cls_history.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << "model,epoch,loss,train_accuracy,val_accuracy\n";
        for (const auto* r : {res.gcn ? &*res.gcn : nullptr, res.gat ? &*res.gat : nullptr}) {
          if (!r) continue;
          for (const auto& e : r->history) {
            os << to_string(r->model.arch()) << ',' << e.epoch << ',' << e.loss << ',' << e.train_accuracy << ','
               << e.val_accuracy << '\n';
          }
        }
        write_atomic(cls_history, os.str());
      }
      const std::string table = render_classification_table(res.rows);
      if (!cls_out.empty()) write_atomic(cls_out, classification_csv(res.rows));
      if (!cls_report.empty()) write_atomic(cls_report, table);
      out << table;
      out << "majority-class test accuracy: " << std::fixed << std::setprecision(3) << res.majority_accuracy << "\n";
      return kExitOk;
    };
  });

  // export -----------------------------------------------------------------
  auto* exp = app.add_subcommand("export", "Write a graph as GraphML, DOT or JSONL");
  std::string exp_graph;
  std::string exp_format;
  std::string exp_out;
  exp->add_option("--graph", exp_graph, "Graph file")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", exp_format, "graphml, dot or jsonl")
      ->required()
      ->check(CLI::IsMember(kFormats, CLI::ignore_case));
  exp->add_option("-o,--out", exp_out, "Output file")->required();
  exp->callback([&] {
    action = [&] {
      const KnowledgeGraph g = load_graph(exp_graph);
      write_graph_with_features(g, exp_out, parse_graph_format(exp_format));
      out << "wrote " << exp_out << " (" << g.node_count() << " nodes, " << g.edge_count() << " edges)\n";
      return kExitOk;
    };
  });

  // report -----------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Run synth/ingest/build/recommend/classify and write a run report");
  std::string rep_dir;
  std::string rep_corpus;
  bool rep_no_classify = false;
  bool rep_no_tfidf = false;
  report->add_option("-o,--out-dir", rep_dir, "Output directory")->required();
  report->add_option("--corpus", rep_corpus, "Corpus to use instead of the synthetic one")->check(CLI::ExistingFile);
  report->add_flag("--no-classify", rep_no_classify, "Skip the classification task");
  report->add_flag("--no-tfidf", rep_no_tfidf, "Skip the TF-IDF baseline");
  report->callback([&] {
    action = [&] {
      const Config c = base_config(common);
      RunReport r;
      r.config = to_json(c);
      Timer t;
      const Corpus corpus = rep_corpus.empty() ? synth_corpus(c.synth) : load_corpus(rep_corpus, corpus_format_from_path(rep_corpus));
      r.corpus_digest = corpus_digest(corpus);
      r.documents = corpus.size();
      r.timing.emplace_back("corpus", t.seconds());

      t = Timer{};
      IngestOptions opts;
      opts.refine.max_words = c.max_words;
      opts.scrub = c.scrub_pii;
      if (!c.pii_names.empty()) opts.pii_names = load_name_list(c.pii_names);
      IngestResult ing;
      if (c.extractor == ExtractorKind::Llm) {
        ing = ingest_llm(corpus, LlmClient(llm_client_config(c)), opts);
      } else {
        ing = ingest_gazetteer(corpus, make_configured_gazetteer(c), opts);
      }
      if (!ing.failures.empty()) {
        std::string lines;
        for (const auto& f : ing.failures) lines += ordered_json{{"doc_id", f.doc_id}, {"error", f.message}}.dump() + "\n";
        write_atomic(fs::path(rep_dir) / "failures.jsonl", lines);
        err << "error: " << ing.failures.size() << " documents failed extraction; see failures.jsonl\n";
        return kExitDomain;
      }
      r.timing.emplace_back("ingest", t.seconds());

      t = Timer{};
      const auto provider = make_embedding_provider(c);
      const KnowledgeGraph g = build_knowledge_graph(ing.store, provider.get());
      r.graph = stats(g);
      r.timing.emplace_back("build", t.seconds());

      t = Timer{};
      RecExperimentConfig rc;
      rc.hops = c.hops;
      rc.measure = c.centrality;
      rc.seed = c.seeds.random_baseline;
      rc.baseline_n = c.top_n;
      r.recommendation = run_recommendation_experiment(g, rc).rows;
      r.timing.emplace_back("recommend", t.seconds());

      if (!rep_no_classify) {
        t = Timer{};
        ClsExperimentConfig ec = classification_config(c);
        ec.tfidf = !rep_no_tfidf;
        const auto res = run_classification_experiment(g, &corpus, ec);
        r.classification = res.rows;
        r.majority_accuracy = res.majority_accuracy;
        r.timing.emplace_back("classify", t.seconds());
      }

      const fs::path dir(rep_dir);
      write_atomic(dir / "report.md", render_markdown(r));
      write_atomic(dir / "report.json", to_json(r).dump(2) + "\n");
      write_atomic(dir / "recommendation.csv", recommendation_csv(r.recommendation));
      if (!r.classification.empty()) write_atomic(dir / "classification.csv", classification_csv(r.classification));
      out << render_markdown(r);
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace hrkg::cli
