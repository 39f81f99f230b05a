#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hrkg/config.hpp"
#include "hrkg/gnn.hpp"
#include "hrkg/recommend.hpp"
#include "json.hpp"

namespace hrkg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `hrkg` tool. Never throws; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Snapshot of one end-to-end run.
struct RunReport {
  nlohmann::ordered_json config;
  std::string corpus_digest;
  std::size_t documents = 0;
  GraphStats graph;
  std::vector<RecTableRow> recommendation;
  std::vector<ClsRow> classification;
  double majority_accuracy = 0.0;
  /// Stage name -> seconds, in execution order.
  std::vector<std::pair<std::string, double>> timing;
};

/// FNV-1a 64 of the canonical JSONL form, as 16 hex digits.
std::string corpus_digest(const Corpus& corpus);

nlohmann::ordered_json to_json(const RunReport& r);
std::string render_markdown(const RunReport& r);

nlohmann::ordered_json to_json(const RankedRecommendation& r);
std::string recommendation_csv(const std::vector<RecTableRow>& rows);

}  // namespace hrkg::cli
