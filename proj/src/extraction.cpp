#include "hrkg/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"
#include "json.hpp"

namespace hrkg {

using nlohmann::ordered_json;

std::size_t RawEntitySet::size() const {
  std::size_t n = 0;
  for (const auto& [type, items] : groups) n += items.size();
  return n;
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

constexpr std::string_view kCvPrompt =
    "You are an entity extraction expert, you can identify and extract different types of "
    "entities from a text. Here is some information from a CV. Your task is to find and enlist "
    "all the information entities like education (degree, grade, school name), skills (which "
    "skills the person has), qualifications (skills), experience (action verb and nouns), and "
    "any other helpful token that is important for a job, and share them in a list where "
    "entities are separated by commas. Do not write anything else. Just the small entities "
    "separated by commas in a dictionary (JSON). Each entity can have only 1-2 words.\n"
    "<Insert CV text here>";

constexpr std::string_view kJdPrompt =
    "You are an entity extraction expert, you can identify and extract different types of "
    "entities from a text. Here is some information from a job description. Your task is to "
    "find and enlist all the information entities like education (degree requirement), skills "
    "(which skills the job needs), qualifications (skills), experience (action verb and nouns), "
    "and any other helpful token that is important for a job, and share them in a list where "
    "entities are separated by commas. Do not write anything else. Just the small entities "
    "separated by commas in a dictionary (JSON). Each entity can have only 1-2 words.\n"
    "<Insert job description text here>";

}  // namespace

std::string_view prompt_template(DocKind kind) { return kind == DocKind::CV ? kCvPrompt : kJdPrompt; }

std::string build_prompt(const Document& doc) {
  std::string prompt(prompt_template(doc.kind));
  const std::string_view marker = doc.kind == DocKind::CV ? kCvTextMarker : kJdTextMarker;
  const std::size_t pos = prompt.find(marker);
  prompt.replace(pos, marker.size(), doc.text);
  return prompt;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

// End index (exclusive) of the balanced object starting at `open`, or npos.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

void collect_leaves(const ordered_json& v, std::vector<std::string>& out) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array() || v.is_object()) {
    for (const auto& child : v) collect_leaves(child, out);
  }
}

}  // namespace

RawEntitySet parse_llm_response(std::string_view raw, std::string_view doc_id) {
  const std::string context = doc_id.empty() ? std::string() : " for '" + std::string(doc_id) + "'";
  for (std::size_t open = raw.find('{'); open != std::string_view::npos;
       open = raw.find('{', open + 1)) {
    const std::size_t end = match_object(raw, open);
    if (end == std::string_view::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(raw.substr(open, end - open));
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    if (!j.is_object()) continue;
    RawEntitySet set;
    set.doc_id = std::string(doc_id);
    for (const auto& [key, value] : j.items()) {
      std::vector<std::string> leaves;
      collect_leaves(value, leaves);
      if (leaves.empty()) continue;
      auto& group = set.groups[entity_type_from_key(key)];
      group.insert(group.end(), leaves.begin(), leaves.end());
    }
    if (set.size() == 0) throw ParseError("extraction response" + context + " has no entity strings");
    return set;
  }
  throw ParseError("no JSON object in extraction response" + context);
}

std::string to_response_json(const RawEntitySet& set) {
  ordered_json j = ordered_json::object();
  for (const auto& [type, items] : set.groups) {
    std::string key(to_string(type));
    if (type == EntityType::Skill || type == EntityType::Qualification) key += 's';
    j[key] = items;
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// Gazetteer

Gazetteer::Gazetteer(const std::map<EntityType, std::vector<std::string>>& terms) {
  for (const auto& [type, list] : terms) {
    for (const auto& t : list) add(t, type);
  }
}

void Gazetteer::add(std::string_view term, EntityType type) {
  const std::string canon = text::canonicalize(term);
  if (canon.empty()) return;
  std::size_t node = 0;
  for (unsigned char c : canon) {
    auto it = nodes_[node].next.find(c);
    if (it == nodes_[node].next.end()) {
      nodes_.push_back(TrieNode{});
      it = nodes_[node].next.emplace(c, nodes_.size() - 1).first;
    }
    node = it->second;
  }
  auto& types = nodes_[node].types;
  if (std::find(types.begin(), types.end(), type) == types.end()) {
    types.push_back(type);
    std::sort(types.begin(), types.end());
    ++term_count_;
  }
}

RawEntitySet Gazetteer::extract(const Document& doc) const {
  // Lowercased, whitespace-collapsed view with a map back to source offsets.
  std::string norm;
  std::vector<std::size_t> origin;
  norm.reserve(doc.text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < doc.text.size(); ++i) {
    const auto c = static_cast<unsigned char>(doc.text[i]);
    if (text::is_space(c)) {
      pending_space = !norm.empty();
      continue;
    }
    if (pending_space) {
      norm.push_back(' ');
      origin.push_back(i);
      pending_space = false;
    }
    norm.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    origin.push_back(i);
  }

  RawEntitySet out;
  out.doc_id = doc.id;
  std::size_t i = 0;
  while (i < norm.size()) {
    const bool at_boundary = i == 0 || !text::is_word_char(static_cast<unsigned char>(norm[i - 1]));
    std::size_t best_end = 0;
    const TrieNode* best = nullptr;
    if (at_boundary) {
      std::size_t node = 0;
      for (std::size_t j = i; j < norm.size(); ++j) {
        auto it = nodes_[node].next.find(static_cast<unsigned char>(norm[j]));
        if (it == nodes_[node].next.end()) break;
        node = it->second;
        const bool closes = j + 1 == norm.size() ||
                            !text::is_word_char(static_cast<unsigned char>(norm[j + 1]));
        if (!nodes_[node].types.empty() && closes) {
          best = &nodes_[node];
          best_end = j + 1;
        }
      }
    }
    if (best) {
      const std::size_t from = origin[i];
      const std::size_t to = origin[best_end - 1] + 1;
      const std::string surface = doc.text.substr(from, to - from);
      for (EntityType t : best->types) out.groups[t].push_back(surface);
      i = best_end;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<std::pair<EntityType, std::string>> Gazetteer::entries() const {
  std::vector<std::pair<EntityType, std::string>> out;
  std::string prefix;
  auto walk = [&](auto&& self, std::size_t node) -> void {
    for (EntityType t : nodes_[node].types) out.emplace_back(t, prefix);
    for (const auto& [c, child] : nodes_[node].next) {
      prefix.push_back(static_cast<char>(c));
      self(self, child);
      prefix.pop_back();
    }
  };
  walk(walk, 0);
  std::sort(out.begin(), out.end());
  return out;
}

Gazetteer make_gazetteer(const EntityPools& pools) {
  Gazetteer g;
  for (const auto& [area, terms] : pools) {
    for (const auto& t : terms) g.add(t.term, t.type);
  }
  return g;
}

Gazetteer load_gazetteer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  Gazetteer g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::canonicalize(line).empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      g.add(j.at("term").get<std::string>(), parse_entity_type(j.at("type").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (g.empty()) throw ValidationError(path.string() + ": gazetteer is empty");
  return g;
}

void save_gazetteer(const Gazetteer& gazetteer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  for (const auto& [type, term] : gazetteer.entries()) {
    ordered_json j;
    j["type"] = std::string(to_string(type));
    j["term"] = term;
    out << j.dump() << '\n';
  }
}

RawEntitySet extract_gazetteer(const Document& doc, const Gazetteer& gazetteer) {
  if (gazetteer.empty()) throw ConfigError("gazetteer is empty");
  return gazetteer.extract(doc);
}

// ---------------------------------------------------------------------------
// Refinement

bool is_content_free(std::string_view canonical, const std::unordered_set<std::string>& stopwords) {
  for (const auto& tok : text::split_whitespace(canonical)) {
    const bool has_letter = std::any_of(tok.begin(), tok.end(), [](char c) {
      return text::is_letter(static_cast<unsigned char>(c));
    });
    if (has_letter && !stopwords.count(tok)) return false;
  }
  return true;
}

EntitySet refine(const RawEntitySet& raw, const RefineOptions& options) {
  if (options.max_words < 1) throw ValidationError("max_words must be >= 1");
  const auto& stopwords = options.stopwords ? *options.stopwords : text::english_stopwords();
  EntitySet out;
  out.doc_id = raw.doc_id;
  std::set<std::pair<EntityType, std::string>> seen;
  for (const auto& [type, items] : raw.groups) {
    for (const auto& surface : items) {
      std::string canon = text::canonicalize(surface);
      if (canon.empty() || text::token_count(canon) > options.max_words) continue;
      if (is_content_free(canon, stopwords)) continue;
      if (!seen.emplace(type, canon).second) continue;
      out.entities.push_back(Entity{surface, std::move(canon), type});
    }
  }
  return out;
}

RawEntitySet lift(const EntitySet& set) {
  RawEntitySet raw;
  raw.doc_id = set.doc_id;
  for (const auto& e : set.entities) raw.groups[e.etype].push_back(e.surface);
  return raw;
}

// ---------------------------------------------------------------------------
// Entity store

std::string to_jsonl_line(const StoredEntitySet& stored) {
  ordered_json j;
  j["doc_id"] = stored.set.doc_id;
  j["kind"] = std::string(to_string(stored.kind));
  j["label"] = stored.label ? ordered_json(std::string(to_string(*stored.label))) : ordered_json(nullptr);
  j["entities"] = ordered_json::array();
  for (const auto& e : stored.set.entities) {
    ordered_json je;
    je["surface"] = e.surface;
    je["canonical"] = e.canonical;
    je["type"] = std::string(to_string(e.etype));
    j["entities"].push_back(std::move(je));
  }
  return j.dump();
}

StoredEntitySet parse_entity_store_line(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    StoredEntitySet s;
    s.set.doc_id = j.at("doc_id").get<std::string>();
    s.kind = parse_doc_kind(j.at("kind").get<std::string>());
    if (j.contains("label") && !j["label"].is_null()) s.label = parse_job_area(j["label"].get<std::string>());
    for (const auto& je : j.at("entities")) {
      Entity e;
      e.canonical = text::canonicalize(je.at("canonical").get<std::string>());
      e.surface = je.contains("surface") ? je["surface"].get<std::string>() : e.canonical;
      e.etype = parse_entity_type(je.at("type").get<std::string>());
      s.set.entities.push_back(std::move(e));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("entity store line: ") + e.what());
  }
}

std::vector<StoredEntitySet> load_entity_store(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::vector<StoredEntitySet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::canonicalize(line).empty()) continue;
    try {
      out.push_back(parse_entity_store_line(line));
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_entity_store(const std::vector<StoredEntitySet>& store,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  for (const auto& s : store) out << to_jsonl_line(s) << '\n';
}

}  // namespace hrkg
