#include "hrkg/types.hpp"

#include <string>

#include "hrkg/error.hpp"
#include "hrkg/text.hpp"

namespace hrkg {

namespace {

constexpr std::array<std::string_view, kJobAreaCount> kAreaNames = {
    "Information Technology", "Business Development", "Finance",      "Advocate",
    "Accountant",             "Engineering",          "Chef",         "Aviation",
    "Fitness",                "Sales",                "Banking",      "Healthcare",
    "Consultant",             "Construction",         "Public Relations",
    "Human Resources",        "Designer",             "Arts",         "Teacher",
    "Apparel",
};

constexpr std::array<std::string_view, kEntityTypeCount> kTypeNames = {
    "Education", "Skill", "Qualification", "Experience", "Other"};

std::string fold(std::string_view s) {
  std::string out = text::to_lower(s);
  for (char& c : out) {
    if (c == '-' || c == '_') c = ' ';
  }
  return text::canonicalize(out);
}

}  // namespace

const std::array<JobArea, kJobAreaCount>& all_job_areas() {
  static const std::array<JobArea, kJobAreaCount> areas = [] {
    std::array<JobArea, kJobAreaCount> a{};
    for (std::size_t i = 0; i < kJobAreaCount; ++i) a[i] = static_cast<JobArea>(i);
    return a;
  }();
  return areas;
}

const std::array<EntityType, kEntityTypeCount>& all_entity_types() {
  static const std::array<EntityType, kEntityTypeCount> types = {
      EntityType::Education, EntityType::Skill, EntityType::Qualification, EntityType::Experience,
      EntityType::Other};
  return types;
}

std::string_view to_string(DocKind kind) { return kind == DocKind::CV ? "CV" : "JD"; }

std::string_view to_string(EntityType type) { return kTypeNames[index_of(type)]; }

std::string_view to_string(JobArea area) { return kAreaNames[index_of(area)]; }

DocKind parse_doc_kind(std::string_view s) {
  const std::string f = fold(s);
  if (f == "cv") return DocKind::CV;
  if (f == "jd") return DocKind::JD;
  throw ValidationError("unknown document kind '" + std::string(s) + "' (expected CV or JD)");
}

JobArea parse_job_area(std::string_view s) {
  const std::string f = fold(s);
  for (std::size_t i = 0; i < kJobAreaCount; ++i) {
    if (f == text::to_lower(kAreaNames[i])) return static_cast<JobArea>(i);
  }
  throw ValidationError("unknown job area '" + std::string(s) + "'");
}

EntityType entity_type_from_key(std::string_view key) {
  const std::string f = fold(key);
  if (f == "education" || f == "educations") return EntityType::Education;
  if (f == "skill" || f == "skills") return EntityType::Skill;
  if (f == "qualification" || f == "qualifications") return EntityType::Qualification;
  if (f == "experience" || f == "experiences") return EntityType::Experience;
  return EntityType::Other;
}

EntityType parse_entity_type(std::string_view s) {
  const std::string f = fold(s);
  for (std::size_t i = 0; i < kEntityTypeCount; ++i) {
    if (f == text::to_lower(kTypeNames[i])) return static_cast<EntityType>(i);
  }
  throw ValidationError("unknown entity type '" + std::string(s) + "'");
}

}  // namespace hrkg
