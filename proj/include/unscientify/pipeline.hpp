#pragma once

// Per-sentence workflow: uncertainty pattern matching, sentence-level
// cancellation, authorial attribution and explanation.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "unscientify/pattern.hpp"
#include "unscientify/textmodel.hpp"

namespace unscientify {

enum class Label { kClaim, kUncertainty };
enum class AuthorialRef { kNone, kAuthor, kFormerStudy, kBoth };

std::string_view to_string(Label label);        // "CLAIM", "UNCERTAINTY"
std::string_view to_string(AuthorialRef ref);   // "NONE", "AUTHOR", "FORMER_STUDY", "BOTH"
std::string_view display_name(AuthorialRef ref);  // "Author(s)", "Former Study(s)", "Both"
std::optional<Label> label_from_string(std::string_view s);
std::optional<AuthorialRef> authorial_ref_from_string(std::string_view s);

struct CanceledPair {
  SpanMatch cue;
  SpanMatch cancellation;
  friend bool operator==(const CanceledPair&, const CanceledPair&) = default;
};

struct Verdict {
  std::string sentence_id;
  Label label = Label::kClaim;
  std::vector<SpanMatch> su_spans;
  std::vector<CanceledPair> canceled;
  AuthorialRef authorial_ref = AuthorialRef::kNone;
  std::string explanation;
  std::string library_version;
  std::string text_checksum;  // of the preprocessed sentence text

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct ComplexCheck {
  std::vector<SpanMatch> surviving;
  std::vector<CanceledPair> canceled;
};

// Uncertainty-group spans of the sentence. A span contained in another span
// of the same group is dropped.
std::vector<SpanMatch> collect_su_spans(const Sentence& sentence, const PatternLibrary& lib);

// Any rebuttal, confirmation or neutral span cancels every uncertainty span.
ComplexCheck check_complex(const Sentence& sentence, const std::vector<SpanMatch>& su_spans,
                           const PatternLibrary& lib);

// Capitalized name runs followed by "et al.", "(year)" or "'s (year)".
std::vector<SpanMatch> detect_name_mentions(const Sentence& sentence);

struct AuthorialEvidence {
  std::vector<SpanMatch> self;
  std::vector<SpanMatch> former;
};

AuthorialEvidence collect_authorial_evidence(const Sentence& sentence, const PatternLibrary& lib);

// In-sentence evidence outranks carryover flags; AUTHOR when nothing applies.
AuthorialRef resolve_authorial_ref(const Sentence& sentence, const std::vector<SpanMatch>& su_spans,
                                   const PatternLibrary& lib);

std::string build_explanation(const Verdict& verdict);

// Expects a preprocessed sentence (citations standardized, carryover set).
Verdict annotate_sentence(const Sentence& sentence, const PatternLibrary& lib);
std::vector<Verdict> annotate_document(const Document& doc, const PatternLibrary& lib);

// preprocess_document with the library's carryover markers.
Document prepare_document(const Document& doc, const PatternLibrary& lib);

// Raw text: naive tokenization, preprocessing, annotation.
std::vector<Verdict> annotate_text(std::string_view text, const PatternLibrary& lib);

// Empty when the verdict satisfies the label/span and label/ref couplings.
std::vector<std::string> check_invariants(const Verdict& verdict);

nlohmann::ordered_json verdict_to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& j);  // throws ValidationError
std::string verdict_to_line(const Verdict& verdict);  // compact, no newline

}  // namespace unscientify
