#include "hrkg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hrkg/error.hpp"
#include "hrkg/rng.hpp"
#include "hrkg/text.hpp"
#include "json.hpp"

namespace hrkg {

using nlohmann::ordered_json;

Corpus::Corpus(std::vector<Document> documents, Provenance provenance,
               std::optional<std::uint64_t> seed)
    : documents_(std::move(documents)), provenance_(provenance), seed_(seed) {
  std::unordered_set<std::string> seen;
  for (const auto& d : documents_) {
    if (!seen.insert(d.id).second) throw ValidationError("duplicate document id '" + d.id + "'");
  }
}

const Document* Corpus::find(std::string_view id) const {
  for (const auto& d : documents_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

bool Corpus::fully_labeled() const {
  return std::all_of(documents_.begin(), documents_.end(),
                     [](const Document& d) { return d.label.has_value(); });
}

CorpusFormat corpus_format_from_path(const std::filesystem::path& path) {
  const std::string ext = text::to_lower(path.extension().string());
  if (ext == ".csv") return CorpusFormat::Csv;
  return CorpusFormat::Jsonl;
}

namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

Document make_document(std::string id, std::string_view kind, std::string text,
                       std::string_view label, std::string_view source, std::size_t line) {
  Document d;
  if (id.empty()) throw ParseError(where(source, line) + "missing id");
  d.id = std::move(id);
  try {
    d.kind = parse_doc_kind(kind);
    if (!label.empty()) d.label = parse_job_area(label);
  } catch (const ValidationError& e) {
    throw ValidationError(where(source, line) + e.what());
  }
  d.text = std::move(text);
  return d;
}

std::vector<Document> parse_jsonl(std::istream& in, std::string_view source) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::canonicalize(line).empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where(source, lineno) + "invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ParseError(where(source, lineno) + "expected a JSON object");
    for (const char* field : {"id", "kind", "text"}) {
      if (!j.contains(field) || !j[field].is_string()) {
        throw ParseError(where(source, lineno) + "missing string field '" + field + "'");
      }
    }
    std::string label;
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string()) throw ParseError(where(source, lineno) + "label must be a string");
      label = j["label"].get<std::string>();
    }
    Document d = make_document(j["id"].get<std::string>(), j["kind"].get<std::string>(),
                               j["text"].get<std::string>(), label, source, lineno);
    if (j.contains("meta") && j["meta"].is_object()) {
      for (const auto& [k, v] : j["meta"].items()) {
        d.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

// RFC 4180 records; quoted fields may span lines. Returns false at EOF.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& lineno) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++lineno;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++lineno;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::vector<Document> parse_csv(std::istream& in, std::string_view source) {
  std::vector<std::string> fields;
  std::size_t lineno = 0;
  if (!read_csv_record(in, fields, lineno)) throw ParseError(where(source, 1) + "empty CSV");
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < fields.size(); ++i) column[text::canonicalize(fields[i])] = i;
  for (const char* required : {"id", "kind", "text"}) {
    if (!column.count(required)) {
      throw ParseError(where(source, 1) + "missing column '" + required + "'");
    }
  }
  const auto label_col = column.count("label") ? std::optional(column["label"]) : std::nullopt;
  std::vector<Document> docs;
  for (;;) {
    const std::size_t record_line = lineno + 1;
    try {
      if (!read_csv_record(in, fields, lineno)) break;
    } catch (const ParseError& e) {
      throw ParseError(where(source, record_line) + e.what());
    }
    if (fields.size() == 1 && fields[0].empty()) continue;
    auto get = [&](std::size_t col) -> std::string {
      if (col >= fields.size()) {
        throw ParseError(where(source, record_line) + "expected " + std::to_string(column.size()) +
                         " columns, got " + std::to_string(fields.size()));
      }
      return fields[col];
    };
    docs.push_back(make_document(get(column["id"]), get(column["kind"]), get(column["text"]),
                                 label_col ? get(*label_col) : std::string(), source,
                                 record_line));
  }
  return docs;
}

}  // namespace

Corpus parse_corpus(std::istream& in, CorpusFormat format, std::string_view source_name) {
  auto docs = format == CorpusFormat::Jsonl ? parse_jsonl(in, source_name)
                                            : parse_csv(in, source_name);
  return Corpus(std::move(docs), Provenance::Loaded);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return parse_corpus(in, format, path.string());
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents()) {
    ordered_json j;
    j["id"] = d.id;
    j["kind"] = std::string(to_string(d.kind));
    j["text"] = d.text;
    j["label"] = d.label ? ordered_json(std::string(to_string(*d.label))) : ordered_json(nullptr);
    j["meta"] = ordered_json::object();
    for (const auto& [k, v] : d.meta) j["meta"][k] = v;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out << to_jsonl(corpus);
}

// ---------------------------------------------------------------------------
// PII scrubbing

namespace {

const std::regex& email_pattern() {
  static const std::regex re(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})");
  return re;
}

bool is_phone_separator(char c) { return c == ' ' || c == '-' || c == '.' || c == '(' || c == ')'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string redact_emails(std::string_view in, std::size_t& count) {
  std::string out;
  const std::string s(in);
  auto begin = std::sregex_iterator(s.begin(), s.end(), email_pattern());
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    out.append(s, last, static_cast<std::size_t>(it->position()) - last);
    out += kRedacted;
    last = static_cast<std::size_t>(it->position() + it->length());
    ++count;
  }
  out.append(s, last, std::string::npos);
  return out;
}

std::string redact_phones(std::string_view s, std::size_t& count) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const bool boundary = i == 0 || !text::is_word_char(static_cast<unsigned char>(s[i - 1]));
    if (boundary && (is_digit(c) || c == '+' || c == '(')) {
      std::size_t j = i;
      if (s[j] == '+') ++j;
      while (j < s.size() && s[j] == '(') ++j;
      std::size_t digits = 0;
      std::size_t end = i;
      if (j < s.size() && is_digit(s[j])) {
        while (j < s.size() && (is_digit(s[j]) || is_phone_separator(s[j]))) {
          if (is_digit(s[j])) {
            ++digits;
            end = j + 1;
          }
          ++j;
        }
      }
      const bool closed = end >= s.size() || !text::is_word_char(static_cast<unsigned char>(s[end]));
      if (digits >= 7 && closed) {
        out += kRedacted;
        ++count;
        i = end;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::string redact_name(std::string_view s, std::string_view name_lower, std::size_t& count) {
  const std::string lower = text::to_lower(s);
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t pos = lower.find(name_lower, i);
    if (pos == std::string::npos) break;
    const std::size_t end = pos + name_lower.size();
    const bool left = pos == 0 || !text::is_word_char(static_cast<unsigned char>(s[pos - 1]));
    const bool right = end >= s.size() || !text::is_word_char(static_cast<unsigned char>(s[end]));
    if (left && right) {
      out.append(s.substr(i, pos - i));
      out += kRedacted;
      ++count;
      i = end;
    } else {
      out.append(s.substr(i, pos + 1 - i));
      i = pos + 1;
    }
  }
  out.append(s.substr(i));
  return out;
}

}  // namespace

PiiScrubber::PiiScrubber(std::vector<std::string> names) {
  const std::string token = text::to_lower(std::string(kRedacted.substr(1, kRedacted.size() - 2)));
  for (auto& n : names) {
    std::string c = text::canonicalize(n);
    if (!c.empty() && c != token) names_.push_back(std::move(c));
  }
  // Longer names first so "jane doe" wins over "jane".
  std::sort(names_.begin(), names_.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
}

ScrubResult PiiScrubber::scrub(std::string_view text) const {
  ScrubResult r;
  r.text = redact_emails(text, r.removed_count);
  r.text = redact_phones(r.text, r.removed_count);
  for (const auto& name : names_) r.text = redact_name(r.text, name, r.removed_count);
  return r;
}

ScrubResult scrub_pii(std::string_view text, const std::vector<std::string>& names) {
  return PiiScrubber(names).scrub(text);
}

std::vector<std::string> load_name_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const std::string c = text::canonicalize(line);
    if (c.empty() || c[0] == '#') continue;
    names.push_back(c);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

PoolTerm S(const char* t) { return {t, EntityType::Skill}; }
PoolTerm E(const char* t) { return {t, EntityType::Education}; }
PoolTerm Q(const char* t) { return {t, EntityType::Qualification}; }
PoolTerm X(const char* t) { return {t, EntityType::Experience}; }

}  // namespace

const EntityPools& default_entity_pools() {
  static const EntityPools pools = {
      {JobArea::InformationTechnology,
       {S("python"), S("java"), S("sql"), S("linux"), S("cloud computing"), S("network security"),
        S("docker"), S("software testing"), E("bsc computer science"), E("msc information systems"),
        Q("aws certified"), Q("ccna"), Q("itil foundation"), X("system administration"),
        X("database design"), X("api development")}},
      {JobArea::BusinessDevelopment,
       {S("lead generation"), S("market research"), S("negotiation"), S("crm software"),
        S("partnership building"), S("pipeline management"), S("cold calling"),
        S("competitive analysis"), E("mba marketing"), E("bba business"),
        Q("certified business developer"), Q("digital marketing certificate"),
        Q("hubspot certification"), X("client acquisition"), X("business expansion"),
        X("strategic partnerships")}},
      {JobArea::Finance,
       {S("financial modeling"), S("valuation"), S("forecasting"), S("risk analysis"),
        S("excel modeling"), S("budgeting"), S("investment analysis"), S("financial reporting"),
        E("bsc finance"), E("msc financial economics"), Q("cfa charterholder"),
        Q("frm certified"), Q("series 7"), X("portfolio management"), X("treasury operations"),
        X("equity research")}},
      {JobArea::Advocate,
       {S("legal research"), S("litigation"), S("contract drafting"), S("legal writing"),
        S("case management"), S("mediation"), S("courtroom advocacy"), S("due diligence"),
        E("llb"), E("llm law"), Q("bar admission"), Q("notary public"),
        Q("legal practice certificate"), X("client representation"), X("legal counsel"),
        X("dispute resolution")}},
      {JobArea::Accountant,
       {S("accounting"), S("bookkeeping"), S("tax preparation"), S("auditing"),
        S("accounts payable"), S("accounts receivable"), S("quickbooks"), S("reconciliation"),
        E("bcom accounting"), E("master of accountancy"), Q("cpa"), Q("acca"),
        Q("chartered accountant"), X("month end close"), X("payroll processing"),
        X("general ledger")}},
      {JobArea::Engineering,
       {S("autocad"), S("solidworks"), S("matlab"), S("finite element analysis"),
        S("thermodynamics"), S("circuit design"), S("plc programming"), S("quality control"),
        E("beng mechanical"), E("bsc electrical engineering"), Q("professional engineer"),
        Q("six sigma"), Q("iso 9001"), X("product design"), X("process improvement"),
        X("equipment maintenance")}},
      {JobArea::Chef,
       {S("food preparation"), S("menu planning"), S("pastry"), S("knife skills"),
        S("food safety"), S("grilling"), S("sauce making"), S("inventory control"),
        E("culinary arts diploma"), E("hospitality management"), Q("servsafe certified"),
        Q("food hygiene certificate"), Q("haccp"), X("kitchen management"), X("line cooking"),
        X("catering events")}},
      {JobArea::Aviation,
       {S("flight planning"), S("navigation"), S("aircraft maintenance"), S("avionics"),
        S("air traffic control"), S("flight safety"), S("crew resource management"),
        S("meteorology"), E("aeronautical engineering"), E("aviation science degree"),
        Q("commercial pilot license"), Q("airline transport pilot"), Q("faa certification"),
        X("flight hours"), X("aircraft inspection"), X("ground operations")}},
      {JobArea::Fitness,
       {S("personal training"), S("strength training"), S("nutrition coaching"),
        S("group fitness"), S("yoga"), S("cardio conditioning"), S("injury prevention"),
        S("fitness assessment"), E("kinesiology degree"), E("sports science"),
        Q("ace certified"), Q("nasm certification"), Q("cpr certified"), X("client coaching"),
        X("class instruction"), X("program design")}},
      {JobArea::Sales,
       {S("sales"), S("salesmanship"), S("closing deals"), S("customer relationship"),
        S("upselling"), S("product demonstration"), S("territory management"),
        S("sales forecasting"), E("business administration"), E("marketing diploma"),
        Q("certified sales professional"), Q("sandler training"), Q("spin selling"),
        X("retail sales"), X("account management"), X("quota attainment")}},
      {JobArea::Banking,
       {S("loan processing"), S("credit analysis"), S("anti money laundering"),
        S("kyc compliance"), S("cash handling"), S("branch operations"), S("mortgage lending"),
        S("wealth management"), E("banking finance degree"), E("msc banking"),
        Q("certified banker"), Q("caib"), Q("aml certification"), X("teller operations"),
        X("relationship banking"), X("credit underwriting")}},
      {JobArea::Healthcare,
       {S("patient care"), S("clinical assessment"), S("phlebotomy"), S("medical records"),
        S("vital signs"), S("infection control"), S("medication administration"),
        S("emr systems"), E("bsc nursing"), E("mbbs"), Q("registered nurse"),
        Q("bls certified"), Q("acls"), X("ward management"), X("patient education"),
        X("emergency care")}},
      {JobArea::Consultant,
       {S("stakeholder management"), S("process mapping"), S("change management"),
        S("business analysis"), S("data analysis"), S("presentation skills"),
        S("problem solving"), S("strategy development"), E("mba strategy"),
        E("msc management"), Q("pmp"), Q("prince2"), Q("certified management consultant"),
        X("client engagements"), X("workshop facilitation"), X("operational review")}},
      {JobArea::Construction,
       {S("site supervision"), S("blueprint reading"), S("concrete work"), S("scaffolding"),
        S("cost estimation"), S("carpentry"), S("heavy equipment"), S("health safety"),
        E("civil engineering degree"), E("construction management"), Q("osha certified"),
        Q("cscs card"), Q("first aid"), X("project scheduling"), X("site inspection"),
        X("subcontractor coordination")}},
      {JobArea::PublicRelations,
       {S("press releases"), S("media relations"), S("crisis communication"),
        S("social media"), S("copywriting"), S("event planning"), S("brand messaging"),
        S("public speaking"), E("ba communications"), E("journalism degree"),
        Q("accredited pr"), Q("cipr diploma"), Q("apr certification"),
        X("campaign management"), X("press conferences"), X("reputation management")}},
      {JobArea::HumanResources,
       {S("recruitment"), S("onboarding"), S("employee relations"),
        S("performance management"), S("hris"), S("talent acquisition"),
        S("compensation planning"), S("labor law"), E("msc human resources"),
        E("bba hr management"), Q("shrm certified"), Q("cipd level 5"), Q("phr"),
        X("conflict resolution"), X("training coordination"), X("policy development")}},
      {JobArea::Designer,
       {S("adobe photoshop"), S("illustrator"), S("ui design"), S("typography"),
        S("graphic design"), S("figma"), S("branding"), S("wireframing"),
        E("ba visual communication"), E("design diploma"), Q("adobe certified"),
        Q("ux certification"), Q("google ux certificate"), X("portfolio development"),
        X("client presentations"), X("visual identity")}},
      {JobArea::Arts,
       {S("painting"), S("sculpture"), S("drawing"), S("art history"), S("ceramics"),
        S("printmaking"), S("art curation"), S("watercolor"), E("bfa fine arts"),
        E("mfa studio art"), Q("gallery certification"), Q("art therapy certificate"),
        Q("museum studies certificate"), X("exhibition curation"), X("art workshops"),
        X("gallery management")}},
      {JobArea::Teacher,
       {S("lesson planning"), S("classroom management"), S("curriculum development"),
        S("student assessment"), S("differentiated instruction"), S("tutoring"),
        S("special education"), S("educational technology"), E("bed education"),
        E("med teaching"), Q("teaching license"), Q("tefl certificate"), Q("pgce"),
        X("parent communication"), X("grading"), X("mentoring students")}},
      {JobArea::Apparel,
       {S("pattern making"), S("sewing"), S("textile knowledge"), S("fashion design"),
        S("garment construction"), S("merchandising"), S("trend forecasting"),
        S("fabric sourcing"), E("ba fashion"), E("textile technology diploma"),
        Q("garment technologist"), Q("fashion cad certificate"),
        Q("apparel merchandising certificate"), X("sample production"),
        X("visual merchandising"), X("retail buying")}},
  };
  return pools;
}

namespace {

constexpr std::array<std::string_view, 3> kCvIntros = {"Curriculum vitae.", "Candidate profile.",
                                                       "Professional resume."};
constexpr std::array<std::string_view, 3> kJdIntros = {"Job description.", "Open position.",
                                                       "We are hiring."};

std::string_view section_heading(DocKind kind, EntityType type) {
  const bool cv = kind == DocKind::CV;
  switch (type) {
    case EntityType::Education: return cv ? "Education" : "Education requirement";
    case EntityType::Skill: return cv ? "Skills" : "Required skills";
    case EntityType::Qualification: return cv ? "Certifications" : "Preferred certifications";
    case EntityType::Experience: return cv ? "Work history" : "Responsibilities";
    case EntityType::Other: return "Other";
  }
  return "Other";
}

std::string render_document(DocKind kind, const std::vector<PoolTerm>& terms, Rng& rng) {
  const auto& intros = kind == DocKind::CV ? kCvIntros : kJdIntros;
  std::string out(intros[rng.uniform_index(intros.size())]);
  for (EntityType type : all_entity_types()) {
    std::vector<std::string_view> items;
    for (const auto& t : terms) {
      if (t.type == type) items.push_back(t.term);
    }
    if (items.empty()) continue;
    out += ' ';
    out += section_heading(kind, type);
    out += ": ";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += items[i];
    }
    out += '.';
  }
  return out;
}

}  // namespace

Corpus synth_corpus(const SynthParams& params, const EntityPools& pools) {
  if (params.docs_per_category < 1) throw ValidationError("docs_per_category must be >= 1");
  if (!(params.cross_category_overlap >= 0.0 && params.cross_category_overlap <= 1.0)) {
    throw ValidationError("cross_category_overlap must lie in [0, 1]");
  }
  for (JobArea area : all_job_areas()) {
    auto it = pools.find(area);
    if (it == pools.end() || it->second.size() < 8) {
      throw ValidationError("entity pool for '" + std::string(to_string(area)) +
                            "' needs at least 8 terms");
    }
  }
  const std::size_t n_terms = params.terms_per_doc;
  const auto n_foreign =
      static_cast<std::size_t>(params.cross_category_overlap * static_cast<double>(n_terms));
  const std::size_t n_own = n_terms - n_foreign;

  Rng rng(params.seed);
  std::vector<Document> cvs;
  std::vector<Document> jds;
  for (JobArea area : all_job_areas()) {
    const auto& own_pool = pools.at(area);
    for (DocKind kind : {DocKind::CV, DocKind::JD}) {
      auto& out = kind == DocKind::CV ? cvs : jds;
      for (std::size_t i = 0; i < params.docs_per_category; ++i) {
        std::vector<PoolTerm> chosen;
        std::set<std::string> used;
        std::vector<std::size_t> order(own_pool.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        rng.shuffle(order);
        for (std::size_t k = 0; k < std::min(n_own, order.size()); ++k) {
          chosen.push_back(own_pool[order[k]]);
          used.insert(own_pool[order[k]].term);
        }
        for (std::size_t k = 0; k < n_foreign; ++k) {
          for (int attempt = 0; attempt < 64; ++attempt) {
            std::size_t other = rng.uniform_index(kJobAreaCount - 1);
            if (other >= index_of(area)) ++other;
            const auto& pool = pools.at(static_cast<JobArea>(other));
            const PoolTerm& t = pool[rng.uniform_index(pool.size())];
            if (used.insert(t.term).second) {
              chosen.push_back(t);
              break;
            }
          }
        }
        Document d;
        char id[32];
        std::snprintf(id, sizeof id, "%s-%04zu", kind == DocKind::CV ? "cv" : "jd", out.size() + 1);
        d.id = id;
        d.kind = kind;
        d.label = area;
        d.text = render_document(kind, chosen, rng);
        out.push_back(std::move(d));
      }
    }
  }
  std::vector<Document> all;
  all.reserve(cvs.size() + jds.size());
  std::move(cvs.begin(), cvs.end(), std::back_inserter(all));
  std::move(jds.begin(), jds.end(), std::back_inserter(all));
  return Corpus(std::move(all), Provenance::Synthetic, params.seed);
}

}  // namespace hrkg
