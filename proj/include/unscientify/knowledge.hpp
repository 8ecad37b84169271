#pragma once

// The bundled uncertainty pattern library: asset loading, linting and
// coverage telemetry.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "unscientify/groups.hpp"
#include "unscientify/pattern.hpp"
#include "unscientify/preprocess.hpp"
#include "unscientify/textmodel.hpp"

namespace unscientify {

// File name -> pattern document. Rules compile in the order of kAssetFiles.
using AssetBundle = std::map<std::string, nlohmann::json>;

inline constexpr std::array<std::string_view, 4> kAssetFiles = {
    "lexicons.json", "su_groups.json", "cancellation.json", "authorial.json"};

// Rules added after error analysis carry this id prefix.
inline constexpr std::string_view kExtensionPrefix = "ext.";

// Directory used when none is given: $UNSCIENTIFY_PATTERNS, else the build-time
// default.
std::filesystem::path default_patterns_dir();

// Throws LoadError for a missing/unreadable file, CompileError for bad JSON.
AssetBundle read_assets(const std::filesystem::path& dir);

// Writes every file of the bundle (write to temporary, then rename).
void write_assets(const std::filesystem::path& dir, const AssetBundle& assets);

// Validates the bundle shape (exactly the four files, each an object) and
// compiles the merged document. Throws CompileError.
PatternLibrary compile_assets(const AssetBundle& assets, bool paper_faithful = false);

PatternLibrary load_library(const std::filesystem::path& dir, bool paper_faithful = false);
PatternLibrary load_default_library(bool paper_faithful = false);

bool is_extension_rule(const PatternRule& rule);

// Marker lists for the carryover heuristic, taken from the library's
// first_person and former_study_markers lexicons (defaults when absent).
CarryoverLexicon carryover_lexicon(const PatternLibrary& lib);

enum class Severity { kError, kWarning };
enum class LintKind { kDuplicate, kShadowed, kUnreachable, kDegenerate };

std::string_view to_string(Severity s);
std::string_view to_string(LintKind k);

struct LintFinding {
  Severity severity = Severity::kWarning;
  LintKind kind = LintKind::kUnreachable;
  std::string rule_id;  // or "lexicon:<name>" for lexicon entries
  std::string message;
};

std::vector<LintFinding> lint(const PatternLibrary& lib);
bool has_errors(const std::vector<LintFinding>& findings);
nlohmann::json findings_to_json(const std::vector<LintFinding>& findings);

// Sentences that no rule should ever match.
const std::vector<Sentence>& degenerate_sentences();

// Number of sentences with at least one match, per group.
using GroupCounts = std::array<std::size_t, kGroupCount>;
GroupCounts coverage_report(const PatternLibrary& lib, const std::vector<Document>& corpus);

// One bold cue of the exemplar fixture.
struct Exemplar {
  Group group = Group::kExplicitSu;
  std::string sentence;
  std::string cue;
};

struct ExemplarResult {
  Exemplar exemplar;
  bool matched = false;
  std::string span;  // matching span text, empty when unmatched
};

// Extra tokens of governing context a span may carry around the cue.
inline constexpr std::size_t kExemplarContextTokens = 2;

std::vector<Exemplar> load_exemplars(const std::filesystem::path& file);

// A cue counts as matched when a span of its group covers the cue tokens and
// adds at most kExemplarContextTokens around them.
std::vector<ExemplarResult> run_exemplars(const PatternLibrary& lib,
                                          const std::vector<Exemplar>& exemplars);

}  // namespace unscientify
