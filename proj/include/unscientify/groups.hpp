#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace unscientify {

// The twelve uncertainty pattern groups followed by the auxiliary rule sets
// used for cancellation and authorial attribution.
enum class Group : std::uint8_t {
  kExplicitSu,
  kModality,
  kConditional,
  kHypothesis,
  kPrediction,
  kInterrogative,
  kNonGeneralizable,
  kAdverbialSu,
  kNegation,
  kSubjectivity,
  kConjectural,
  kDisagreement,
  kRebuttal,
  kConfirmation,
  kNeutral,
  kSelfRef,
  kFormerRef,
};

inline constexpr std::size_t kGroupCount = 17;
inline constexpr std::size_t kSuGroupCount = 12;

std::string_view group_name(Group g);         // e.g. "EXPLICIT_SU"
std::string_view group_description(Group g);  // e.g. "Explicit Scientific Uncertainty"
std::optional<Group> group_from_name(std::string_view name);

constexpr bool is_su_group(Group g) { return static_cast<std::size_t>(g) < kSuGroupCount; }
constexpr bool is_cancellation_group(Group g) {
  return g == Group::kRebuttal || g == Group::kConfirmation || g == Group::kNeutral;
}

constexpr std::array<Group, kSuGroupCount> kSuGroups = {
    Group::kExplicitSu,    Group::kModality,         Group::kConditional,
    Group::kHypothesis,    Group::kPrediction,       Group::kInterrogative,
    Group::kNonGeneralizable, Group::kAdverbialSu,   Group::kNegation,
    Group::kSubjectivity,  Group::kConjectural,      Group::kDisagreement};

class GroupSet {
 public:
  constexpr GroupSet() = default;
  GroupSet(std::initializer_list<Group> groups) {
    for (auto g : groups) insert(g);
  }
  static GroupSet all() { return GroupSet(std::bitset<kGroupCount>().set()); }
  static GroupSet su();
  static GroupSet cancellation() {
    return {Group::kRebuttal, Group::kConfirmation, Group::kNeutral};
  }
  static GroupSet authorial() { return {Group::kSelfRef, Group::kFormerRef}; }

  void insert(Group g) { bits_.set(static_cast<std::size_t>(g)); }
  bool contains(Group g) const { return bits_.test(static_cast<std::size_t>(g)); }
  bool empty() const { return bits_.none(); }

 private:
  explicit GroupSet(std::bitset<kGroupCount> bits) : bits_(bits) {}
  std::bitset<kGroupCount> bits_;
};

}  // namespace unscientify
