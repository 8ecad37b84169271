#pragma once

// Declarative token-sequence patterns: compilation from the JSON pattern-file
// schema and matching against annotated sentences.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "unscientify/groups.hpp"
#include "unscientify/textmodel.hpp"

namespace unscientify {

enum class Quantifier { kOne, kOpt, kStar, kPlus };

std::string_view to_string(Quantifier q);  // "1", "?", "*", "+"
std::optional<Quantifier> quantifier_from_string(std::string_view s);

// Constraints on one token (or one lexicon phrase). Present constraints are
// AND-combined. lemma_in and lexicon entries may be multiword phrases; such a
// matcher consumes one token per phrase word.
struct TokenMatcher {
  std::optional<std::string> text_exact;
  bool case_sensitive = false;
  std::optional<std::string> text_regex;
  std::optional<std::vector<std::string>> lemma_in;
  std::optional<std::string> lexicon_ref;
  std::optional<std::vector<Upos>> upos_in;
  std::optional<std::vector<Upos>> upos_not_in;
  std::vector<MorphFeature> morph_all;
  std::optional<std::vector<std::string>> dep_in;
  std::optional<std::vector<std::string>> head_lemma_in;
  Quantifier quantifier = Quantifier::kOne;

  bool has_constraint() const;
  friend bool operator==(const TokenMatcher&, const TokenMatcher&) = default;
};

struct PatternRule {
  std::string id;
  Group group = Group::kExplicitSu;
  std::vector<TokenMatcher> matchers;
  std::size_t max_span_tokens = 12;
  std::string note;

  // Same constraints, ignoring id and note.
  bool same_effect(const PatternRule& other) const;
};

using LexiconMap = std::map<std::string, std::vector<std::string>>;

struct SpanMatch {
  std::string sentence_id;
  std::size_t start_token = 0;
  std::size_t end_token = 0;  // exclusive
  Group group = Group::kExplicitSu;
  std::string pattern_id;
  std::string matched_text;

  std::size_t length() const { return end_token - start_token; }
  friend bool operator==(const SpanMatch&, const SpanMatch&) = default;
};

// Canonical order: start, longer first, group, pattern id.
bool span_order(const SpanMatch& a, const SpanMatch& b);

namespace detail {
struct CompiledLibrary;
}

// Immutable compiled library. Copies share the compiled state.
class PatternLibrary {
 public:
  PatternLibrary();

  const std::vector<PatternRule>& rules() const;
  const LexiconMap& lexicons() const;
  // Content hash (16 hex digits) over the canonical rule and lexicon form.
  const std::string& version() const;
  const PatternRule* find(std::string_view rule_id) const;
  std::size_t size() const { return rules().size(); }

  // The source document this library compiles from.
  nlohmann::json to_json() const;

  const detail::CompiledLibrary& compiled() const { return *impl_; }

 private:
  friend PatternLibrary compile_json(const nlohmann::json&, const LexiconMap&);
  std::shared_ptr<const detail::CompiledLibrary> impl_;
};

// Parses and validates a pattern document with top-level keys "lexicons" and
// "rules". Lexicons passed in are merged with those in the document; a name
// defined twice is an error. Throws CompileError.
PatternLibrary compile(std::string_view pattern_source, const LexiconMap& lexicons = {});
PatternLibrary compile_json(const nlohmann::json& pattern_source, const LexiconMap& lexicons = {});

// All maximal matches of rules whose group is in `groups`: one span per
// (rule, start token), the longest reachable within max_span_tokens.
std::vector<SpanMatch> match_sentence(const Sentence& sentence, const PatternLibrary& lib,
                                      const GroupSet& groups = GroupSet::all());

// Matches of a single rule of the library.
std::vector<SpanMatch> match_rule(const Sentence& sentence, const PatternLibrary& lib,
                                  std::size_t rule_index);

// Builds a library containing every rule of `lib` plus `extra` (same lexicons).
PatternLibrary with_rules(const PatternLibrary& lib, const std::vector<PatternRule>& extra);

nlohmann::json rule_to_json(const PatternRule& rule);

}  // namespace unscientify
