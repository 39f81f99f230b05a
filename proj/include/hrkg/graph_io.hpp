#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hrkg/graph.hpp"

namespace hrkg {

enum class GraphFormat { GraphML, Dot, Jsonl };

/// Throws ValidationError listing the valid names.
GraphFormat parse_graph_format(std::string_view s);
std::string_view to_string(GraphFormat format);

/// Node colours used in DOT output.
inline constexpr std::string_view kCvColor = "green";
inline constexpr std::string_view kJdColor = "red";
inline constexpr std::string_view kEntityColor = "blue";

/// Serialises labels, kinds, areas and edge kinds. Features are not inlined;
/// `feature_sidecar` (if given) is recorded as a reference.
std::string export_graph(const KnowledgeGraph& g, GraphFormat format,
                         std::string_view feature_sidecar = {});

struct ImportedGraph {
  KnowledgeGraph graph;
  std::optional<std::string> feature_sidecar;
};

/// GraphML and JSONL only; DOT is an export-only rendering format.
ImportedGraph import_graph(std::string_view data, GraphFormat format);

void save_graph(const KnowledgeGraph& g, const std::filesystem::path& path, GraphFormat format,
                std::string_view feature_sidecar = {});

/// Format from extension (.graphml, .jsonl); resolves a relative sidecar
/// against the graph file's directory and loads it when present.
KnowledgeGraph load_graph(const std::filesystem::path& path);

}  // namespace hrkg
