#include "hrkg/graph_io.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fstream>
#include <sstream>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"
#include "json.hpp"

namespace hrkg {

using nlohmann::ordered_json;
namespace pt = boost::property_tree;

GraphFormat parse_graph_format(std::string_view s) {
  const std::string f = text::to_lower(s);
  if (f == "graphml") return GraphFormat::GraphML;
  if (f == "dot") return GraphFormat::Dot;
  if (f == "jsonl") return GraphFormat::Jsonl;
  throw ValidationError("unknown graph format '" + std::string(s) + "' (valid: graphml, dot, jsonl)");
}

std::string_view to_string(GraphFormat format) {
  switch (format) {
    case GraphFormat::GraphML: return "graphml";
    case GraphFormat::Dot: return "dot";
    case GraphFormat::Jsonl: return "jsonl";
  }
  return "jsonl";
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Control characters other than tab/newline are not representable in XML 1.0.
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n' || c == '\r') out += c;
    }
  }
  return out;
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

std::string_view color_of(const NodeKind& kind) {
  if (kind.is_entity()) return kEntityColor;
  return kind.doc_kind == DocKind::CV ? kCvColor : kJdColor;
}

std::string to_graphml(const KnowledgeGraph& g, std::string_view sidecar) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
     << "  <key id=\"features\" for=\"graph\" attr.name=\"features\" attr.type=\"string\"/>\n"
     << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
     << "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
     << "  <key id=\"area\" for=\"node\" attr.name=\"area\" attr.type=\"string\"/>\n"
     << "  <key id=\"edge_kind\" for=\"edge\" attr.name=\"kind\" attr.type=\"string\"/>\n"
     << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  if (!sidecar.empty()) os << "    <data key=\"features\">" << xml_escape(sidecar) << "</data>\n";
  for (const auto& n : g.nodes()) {
    os << "    <node id=\"" << xml_escape(n.key) << "\">"
       << "<data key=\"label\">" << xml_escape(n.label) << "</data>"
       << "<data key=\"kind\">" << n.kind.name() << "</data>";
    if (n.area) os << "<data key=\"area\">" << to_string(*n.area) << "</data>";
    os << "</node>\n";
  }
  for (const auto& e : g.edges()) {
    os << "    <edge source=\"" << xml_escape(g.node(e.doc).key) << "\" target=\""
       << xml_escape(g.node(e.entity).key) << "\"><data key=\"edge_kind\">" << to_string(e.kind)
       << "</data></edge>\n";
  }
  os << "  </graph>\n</graphml>\n";
  return os.str();
}

std::string to_dot(const KnowledgeGraph& g) {
  std::ostringstream os;
  os << "graph hrkg {\n  node [style=filled];\n";
  for (const auto& n : g.nodes()) {
    const auto color = color_of(n.kind);
    os << "  \"" << dot_escape(n.key) << "\" [label=\"" << dot_escape(n.label) << "\", kind=\""
       << n.kind.name() << "\", color=\"" << color << "\", fillcolor=\"" << color << "\"";
    if (n.area) os << ", area=\"" << to_string(*n.area) << "\"";
    os << "];\n";
  }
  for (const auto& e : g.edges()) {
    os << "  \"" << dot_escape(g.node(e.doc).key) << "\" -- \"" << dot_escape(g.node(e.entity).key)
       << "\" [kind=\"" << to_string(e.kind) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_jsonl(const KnowledgeGraph& g, std::string_view sidecar) {
  std::string out;
  ordered_json header;
  header["type"] = "graph";
  header["directed"] = false;
  header["nodes"] = g.node_count();
  header["edges"] = g.edge_count();
  header["features"] = sidecar.empty() ? ordered_json(nullptr) : ordered_json(std::string(sidecar));
  out += header.dump() + "\n";
  for (const auto& n : g.nodes()) {
    ordered_json j;
    j["type"] = "node";
    j["id"] = n.key;
    j["label"] = n.label;
    j["kind"] = std::string(n.kind.name());
    if (n.area) j["area"] = std::string(to_string(*n.area));
    out += j.dump() + "\n";
  }
  for (const auto& e : g.edges()) {
    ordered_json j;
    j["type"] = "edge";
    j["source"] = g.node(e.doc).key;
    j["target"] = g.node(e.entity).key;
    j["kind"] = std::string(to_string(e.kind));
    out += j.dump() + "\n";
  }
  return out;
}

NodeIndex require_node(const KnowledgeGraph& g, const std::string& key) {
  auto i = g.find(key);
  if (!i) throw ParseError("edge references unknown node '" + key + "'");
  return *i;
}

ImportedGraph from_graphml(std::string_view data) {
  pt::ptree tree;
  std::istringstream is{std::string(data)};
  try {
    pt::read_xml(is, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("GraphML: ") + e.what());
  }
  ImportedGraph out;
  const auto root = tree.get_child_optional("graphml");
  if (!root) throw ParseError("GraphML: missing <graphml> root");
  const auto graph = root->get_child_optional("graph");
  if (!graph) throw ParseError("GraphML: missing <graph> element");

  auto data_of = [](const pt::ptree& elem) {
    std::map<std::string, std::string> values;
    for (const auto& [tag, child] : elem) {
      if (tag == "data") values[child.get<std::string>("<xmlattr>.key", "")] = child.data();
    }
    return values;
  };
  for (const auto& [tag, child] : *graph) {
    if (tag == "data" && child.get<std::string>("<xmlattr>.key", "") == "features") {
      out.feature_sidecar = child.data();
    } else if (tag == "node") {
      const auto d = data_of(child);
      Node n;
      n.key = child.get<std::string>("<xmlattr>.id");
      n.label = d.count("label") ? d.at("label") : n.key;
      if (!d.count("kind")) throw ParseError("GraphML: node '" + n.key + "' has no kind");
      n.kind = NodeKind::parse(d.at("kind"));
      if (d.count("area") && !d.at("area").empty()) n.area = parse_job_area(d.at("area"));
      out.graph.add_node(std::move(n));
    }
  }
  for (const auto& [tag, child] : *graph) {
    if (tag != "edge") continue;
    const auto d = data_of(child);
    const auto u = require_node(out.graph, child.get<std::string>("<xmlattr>.source"));
    const auto v = require_node(out.graph, child.get<std::string>("<xmlattr>.target"));
    const NodeIndex entity = out.graph.node(u).kind.is_entity() ? u : v;
    const EdgeKind kind = d.count("edge_kind") ? parse_edge_kind(d.at("edge_kind"))
                                               : edge_kind_for(out.graph.node(entity).kind.etype);
    out.graph.add_edge(u, v, kind);
  }
  return out;
}

ImportedGraph from_jsonl(std::string_view data) {
  ImportedGraph out;
  std::istringstream is{std::string(data)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (text::canonicalize(line).empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "graph") {
        if (j.contains("features") && j["features"].is_string()) {
          out.feature_sidecar = j["features"].get<std::string>();
        }
      } else if (type == "node") {
        Node n;
        n.key = j.at("id").get<std::string>();
        n.label = j.value("label", n.key);
        n.kind = NodeKind::parse(j.at("kind").get<std::string>());
        if (j.contains("area") && j["area"].is_string()) n.area = parse_job_area(j["area"].get<std::string>());
        out.graph.add_node(std::move(n));
      } else if (type == "edge") {
        const auto u = require_node(out.graph, j.at("source").get<std::string>());
        const auto v = require_node(out.graph, j.at("target").get<std::string>());
        out.graph.add_edge(u, v, parse_edge_kind(j.at("kind").get<std::string>()));
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("graph JSONL line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ParseError("graph JSONL line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string export_graph(const KnowledgeGraph& g, GraphFormat format, std::string_view feature_sidecar) {
  switch (format) {
    case GraphFormat::GraphML: return to_graphml(g, feature_sidecar);
    case GraphFormat::Dot: return to_dot(g);
    case GraphFormat::Jsonl: return to_jsonl(g, feature_sidecar);
  }
  return {};
}

ImportedGraph import_graph(std::string_view data, GraphFormat format) {
  switch (format) {
    case GraphFormat::GraphML: return from_graphml(data);
    case GraphFormat::Jsonl: return from_jsonl(data);
    case GraphFormat::Dot: break;
  }
  throw ValidationError("DOT is an export-only format");
}

void save_graph(const KnowledgeGraph& g, const std::filesystem::path& path, GraphFormat format,
                std::string_view feature_sidecar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << export_graph(g, format, feature_sidecar);
  if (!out) throw Error(path.string() + ": write failed");
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = text::to_lower(path.extension().string());
  const GraphFormat format = ext == ".graphml" || ext == ".xml" ? GraphFormat::GraphML : GraphFormat::Jsonl;
  auto imported = import_graph(buf.str(), format);
  if (imported.feature_sidecar && !imported.feature_sidecar->empty()) {
    std::filesystem::path sidecar(*imported.feature_sidecar);
    if (sidecar.is_relative()) sidecar = path.parent_path() / sidecar;
    // The reference may name the stem or either half of the pair.
    if (sidecar.extension() == ".json" || sidecar.extension() == ".bin") sidecar.replace_extension();
    if (std::filesystem::exists(std::filesystem::path(sidecar.string() + ".json"))) {
      imported.graph.set_features(load_feature_matrix(sidecar));
    }
  }
  imported.graph.freeze();
  return std::move(imported.graph);
}

}  // namespace hrkg
