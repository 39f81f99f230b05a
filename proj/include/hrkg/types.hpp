#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace hrkg {

enum class DocKind : std::uint8_t { CV, JD };

enum class EntityType : std::uint8_t { Education, Skill, Qualification, Experience, Other };

inline constexpr std::size_t kEntityTypeCount = 5;

enum class JobArea : std::uint8_t {
  InformationTechnology,
  BusinessDevelopment,
  Finance,
  Advocate,
  Accountant,
  Engineering,
  Chef,
  Aviation,
  Fitness,
  Sales,
  Banking,
  Healthcare,
  Consultant,
  Construction,
  PublicRelations,
  HumanResources,
  Designer,
  Arts,
  Teacher,
  Apparel,
};

inline constexpr std::size_t kJobAreaCount = 20;

const std::array<JobArea, kJobAreaCount>& all_job_areas();
const std::array<EntityType, kEntityTypeCount>& all_entity_types();

std::string_view to_string(DocKind kind);
std::string_view to_string(EntityType type);
std::string_view to_string(JobArea area);

/// Case-insensitive. Throws ValidationError on anything else.
DocKind parse_doc_kind(std::string_view s);

/// Case-insensitive; '-' and '_' are accepted in place of spaces.
/// Unknown names throw ValidationError, there is no fallback category.
JobArea parse_job_area(std::string_view s);

/// Maps extraction-response keys ("Skills", "education", ...) onto types.
/// Anything unrecognised becomes Other.
EntityType entity_type_from_key(std::string_view key);

/// Strict inverse of to_string(EntityType), case-insensitive.
EntityType parse_entity_type(std::string_view s);

inline std::size_t index_of(JobArea area) { return static_cast<std::size_t>(area); }
inline std::size_t index_of(EntityType type) { return static_cast<std::size_t>(type); }

inline DocKind opposite(DocKind kind) { return kind == DocKind::CV ? DocKind::JD : DocKind::CV; }

}  // namespace hrkg
