#include "unscientify/groups.hpp"

namespace unscientify {

namespace {

struct GroupInfo {
  std::string_view name;
  std::string_view description;
};

constexpr std::array<GroupInfo, kGroupCount> kGroups = {{
    {"EXPLICIT_SU", "Explicit Scientific Uncertainty"},
    {"MODALITY", "Modality"},
    {"CONDITIONAL", "Conditional Expression"},
    {"HYPOTHESIS", "Hypothesis"},
    {"PREDICTION", "Prediction"},
    {"INTERROGATIVE", "Interrogative Expression"},
    {"NON_GENERALIZABLE", "Non-generalizable Statement"},
    {"ADVERBIAL_SU", "Adverbial Scientific Uncertainty"},
    {"NEGATION", "Negation"},
    {"SUBJECTIVITY", "Subjectivity"},
    {"CONJECTURAL", "Conjectural"},
    {"DISAGREEMENT", "Disagreement"},
    {"REBUTTAL", "rebuttal"},
    {"CONFIRMATION", "confirmation"},
    {"NEUTRAL", "neutral"},
    {"SELF_REF", "Author self-reference"},
    {"FORMER_REF", "Former study reference"},
}};

}  // namespace

std::string_view group_name(Group g) { return kGroups[static_cast<std::size_t>(g)].name; }

std::string_view group_description(Group g) {
  return kGroups[static_cast<std::size_t>(g)].description;
}

std::optional<Group> group_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGroups.size(); ++i) {
    if (kGroups[i].name == name) return static_cast<Group>(i);
  }
  return std::nullopt;
}

GroupSet GroupSet::su() {
  GroupSet s;
  for (auto g : kSuGroups) s.insert(g);
  return s;
}

}  // namespace unscientify
