// Entity and relation type vocabularies shared across the pipeline.

#ifndef EVNET_TYPES_H_
#define EVNET_TYPES_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace evnet {

// Vertex types. Mentions are only ever PER, ORG or LOC; TIME vertices are
// produced by PLT analysis from document timestamps.
enum class EntityType { kPer, kOrg, kLoc, kTime };

// Edge types. The first five are the recognized relation types; CO-OCCUR
// edges come from action analysis.
enum class RelationType { kPerSoc, kGenAff, kOrgAff, kPartWhole, kPhys, kCoOccur };

inline constexpr std::array<EntityType, 3> kMentionTypes = {
    EntityType::kPer, EntityType::kOrg, EntityType::kLoc};

inline constexpr std::array<RelationType, 5> kRelationTypes = {
    RelationType::kPerSoc, RelationType::kGenAff, RelationType::kOrgAff,
    RelationType::kPartWhole, RelationType::kPhys};

std::string_view to_string(EntityType type);
std::string_view to_string(RelationType type);

std::optional<EntityType> parse_entity_type(std::string_view text);
std::optional<RelationType> parse_relation_type(std::string_view text);

// Label used for "no relation" when classifying mention pairs.
inline constexpr std::string_view kNoRelation = "NONE";

}  // namespace evnet

#endif  // EVNET_TYPES_H_
