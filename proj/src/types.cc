#include "evnet/types.h"

namespace evnet {

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::kPer: return "PER";
    case EntityType::kOrg: return "ORG";
    case EntityType::kLoc: return "LOC";
    case EntityType::kTime: return "TIME";
  }
  return "?";
}

std::string_view to_string(RelationType type) {
  switch (type) {
    case RelationType::kPerSoc: return "PER-SOC";
    case RelationType::kGenAff: return "GEN-AFF";
    case RelationType::kOrgAff: return "ORG-AFF";
    case RelationType::kPartWhole: return "PART-WHOLE";
    case RelationType::kPhys: return "PHYS";
    case RelationType::kCoOccur: return "CO-OCCUR";
  }
  return "?";
}

std::optional<EntityType> parse_entity_type(std::string_view text) {
  for (auto t : {EntityType::kPer, EntityType::kOrg, EntityType::kLoc,
                 EntityType::kTime}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<RelationType> parse_relation_type(std::string_view text) {
  for (auto t : {RelationType::kPerSoc, RelationType::kGenAff,
                 RelationType::kOrgAff, RelationType::kPartWhole,
                 RelationType::kPhys, RelationType::kCoOccur}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

}  // namespace evnet
