#pragma once

// Text cleaning, in-text citation standardization to "@CITATION", and the
// cross-sentence reference carryover heuristic.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "unscientify/textmodel.hpp"

namespace unscientify {

inline constexpr std::string_view kCitationToken = "@CITATION";

enum class CitationStyle {
  kNumericBracket,           // [1, 2, 5]
  kParentheticalAuthorYear,  // (see Max & Betty, 2002a; Marshal & Mansell, 2001)
  kNarrativeAuthorYear,      // James et al. (2005)
};

std::string_view to_string(CitationStyle style);

struct CitationSpan {
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  CitationStyle style = CitationStyle::kNumericBracket;
  std::string original_text;

  friend bool operator==(const CitationSpan&, const CitationSpan&) = default;
};

struct StandardizedText {
  std::string text;
  std::vector<CitationSpan> citations;  // original coordinates, ascending
};

// NFC, control characters dropped, whitespace runs collapsed, trimmed.
std::string normalize_text(std::string_view text);

// Replaces recognized citations by kCitationToken. Citations separated only by
// whitespace, ';' or ',' collapse into one token whose span covers the block
// and carries the style of its first member.
StandardizedText standardize_citations(std::string_view text);

// Marker lists consulted by the carryover rule table.
struct CarryoverLexicon {
  std::vector<std::string> first_person;   // single lowercase words
  std::vector<std::string> former_markers; // lowercase phrases

  static CarryoverLexicon defaults();
};

// Sets FORMER_REF / SELF_REF on sentences that open with an anaphor whose
// antecedent sentence carried the matching reference signal.
Document compute_carryover(const Document& doc,
                           const CarryoverLexicon& lexicon = CarryoverLexicon::defaults());

// Normalizes and standardizes one sentence, re-deriving token alignment.
// Tokens overlapping a citation collapse into a single "@CITATION" token.
Sentence preprocess_sentence(const Sentence& sentence);

// preprocess_sentence on every sentence followed by compute_carryover.
Document preprocess_document(const Document& doc,
                             const CarryoverLexicon& lexicon = CarryoverLexicon::defaults());

}  // namespace unscientify
