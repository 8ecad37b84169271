#pragma once

// Linguistic text model: tokens with UD annotations grouped into sentences
// and documents, plus the two ingestion paths (CoNLL-U and raw text).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace unscientify {

// The 17 Universal Dependencies v2 part-of-speech tags. kUnknown marks tokens
// that come from the naive tokenizer (or "_" in CoNLL-U).
enum class Upos : std::uint8_t {
  kAdj, kAdp, kAdv, kAux, kCconj, kDet, kIntj, kNoun, kNum,
  kPart, kPron, kPropn, kPunct, kSconj, kSym, kVerb, kX,
  kUnknown,
};

inline constexpr std::size_t kUposCount = 17;

std::optional<Upos> upos_from_string(std::string_view tag);
std::string_view to_string(Upos upos);

using MorphFeature = std::pair<std::string, std::string>;

struct AnnotatedToken {
  std::size_t index = 0;
  std::string text;
  std::string lemma;
  Upos upos = Upos::kUnknown;
  std::vector<MorphFeature> morph;  // sorted by key
  std::string dep;                  // empty when unknown
  std::optional<std::size_t> head;  // nullopt is ROOT
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool has_feature(const MorphFeature& f) const;
  friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

enum class Carryover : std::uint8_t {
  kNone = 0,
  kFormerRef = 1,
  kSelfRef = 2,
};

constexpr Carryover operator|(Carryover a, Carryover b) {
  return static_cast<Carryover>(static_cast<std::uint8_t>(a) |
                                static_cast<std::uint8_t>(b));
}
constexpr bool has_flag(Carryover set, Carryover flag) {
  return (static_cast<std::uint8_t>(set) & static_cast<std::uint8_t>(flag)) != 0;
}

struct Sentence {
  std::string id;
  std::string raw_text;
  std::vector<AnnotatedToken> tokens;
  Carryover carryover_flags = Carryover::kNone;

  // Surface slice covering tokens [start, end).
  std::string_view slice(std::size_t start, std::size_t end) const;
  // True when at least one token carries a real UPOS tag.
  bool annotated() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Document&, const Document&) = default;
};

// Reads UD v2 CoNLL-U. Multiword ranges and empty nodes are skipped; MISC and
// DEPS are ignored. Throws ParseError (bad column count, bad id/head/UPOS) or
// ValidationError (head out of range, duplicate sentence id).
Document parse_conllu(std::istream& in, std::string doc_id = "doc");
Document parse_conllu_string(std::string_view text, std::string doc_id = "doc");

// Writes ID, FORM, LEMMA, UPOS, FEATS, HEAD, DEPREL; other columns are "_".
std::string write_conllu(const Document& doc);

// Degraded ingestion without linguistic annotations: splits sentences on
// terminal punctuation (with an abbreviation guard) and tokens on whitespace
// and punctuation. lemma is the lowercased surface, upos/dep unknown.
Document naive_tokenize(std::string_view text, std::string doc_id = "doc");

// Sentence splitting only; returns the sentence strings (trimmed).
std::vector<std::string> split_sentences(std::string_view text);

// Token character ranges for one sentence of raw text.
std::vector<std::pair<std::size_t, std::size_t>> tokenize_spans(std::string_view text);

// Builds a sentence from raw text with naive tokens.
Sentence make_naive_sentence(std::string id, std::string text);

// Locates each form in order inside text. Returns nullopt when a form cannot
// be found after the previous one.
std::optional<std::vector<std::pair<std::size_t, std::size_t>>> align_forms(
    std::string_view text, const std::vector<std::string>& forms);

// Lists every violated token/sentence invariant; empty when valid.
std::vector<std::string> validate(const Sentence& sentence);
std::vector<std::string> validate(const Document& doc);

std::string to_lower(std::string_view s);

}  // namespace unscientify
