#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <set>

#include "unscientify/error.hpp"
#include "unscientify/knowledge.hpp"
#include "unscientify/preprocess.hpp"

using namespace unscientify;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kPatterns = UNSCIENTIFY_TEST_PATTERNS;

bool matches(const PatternLibrary& lib, const std::string& sentence, Group group,
             const std::string& text) {
  auto s = preprocess_sentence(make_naive_sentence("s", sentence));
  for (const auto& m : match_sentence(s, lib)) {
    if (m.group == group && m.matched_text == text) return true;
  }
  return false;
}

std::vector<LintFinding> findings_of(const json& doc, LintKind kind) {
  std::vector<LintFinding> out;
  for (const auto& f : lint(compile_json(doc))) {
    if (f.kind == kind) out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_CASE("default library shape") {
  auto lib = load_default_library();
  std::map<Group, std::size_t> per_group;
  for (const auto& r : lib.rules()) per_group[r.group]++;
  for (auto g : kSuGroups) CHECK_MESSAGE(per_group[g] >= 4, group_name(g));
  CHECK(per_group[Group::kRebuttal] > 0);
  CHECK(per_group[Group::kConfirmation] > 0);
  CHECK(per_group[Group::kNeutral] > 0);
  CHECK(per_group[Group::kSelfRef] > 0);
  CHECK(per_group[Group::kFormerRef] > 0);
  for (auto g : kSuGroups) CHECK_FALSE(group_description(g).empty());
}

TEST_CASE("lexicon entries are lowercase and unique") {
  auto lib = load_default_library();
  for (const auto& [name, entries] : lib.lexicons()) {
    std::set<std::string> seen;
    for (const auto& e : entries) {
      CHECK(to_lower(e) == e);
      CHECK(seen.insert(e).second);
    }
  }
}

TEST_CASE("paper-faithful mode drops only the extension rules") {
  auto full = load_default_library();
  auto faithful = load_default_library(true);
  std::size_t ext = 0;
  for (const auto& r : full.rules()) ext += is_extension_rule(r) ? 1 : 0;
  CHECK(ext >= 2);
  CHECK(faithful.size() == full.size() - ext);
  for (const auto& r : faithful.rules()) CHECK_FALSE(is_extension_rule(r));
  CHECK(faithful.version() != full.version());
}

TEST_CASE("version is stable across loads") {
  CHECK(load_default_library().version() == load_library(kPatterns).version());
  CHECK(load_library(kPatterns).version() == load_library(kPatterns).version());
}

TEST_CASE("published exemplar phrases") {
  auto lib = load_default_library();
  CHECK(matches(lib, "There may also be behavioral effects.", Group::kModality, "may also be"));
  CHECK(matches(lib,
                "Our study covers high-income countries and thus cannot be directly generalized "
                "to low-income nations nor extrapolated into the long-term future.",
                Group::kNonGeneralizable, "cannot be directly generalized"));
  CHECK(matches(lib, "However, there is no evidence to support this hypothesis.",
                Group::kRebuttal, "no evidence to support"));
  CHECK(matches(lib,
                "Moreover, the functional relevance of G4 in vivo in mammalian cells remains "
                "controversial.",
                Group::kExplicitSu, "remains controversial"));
}

TEST_CASE("claim sentence has no uncertainty span") {
  auto lib = load_default_library();
  auto s = preprocess_sentence(make_naive_sentence(
      "s",
      "In this test, a likelihood ratio test statistic is calculated for the two tree versus one "
      "tree models, and compared to a null distribution generated by non-parametric "
      "bootstrapping (see Methods)."));
  CHECK(match_sentence(s, lib, GroupSet::su()).empty());
}

TEST_CASE("lint") {
  SUBCASE("default library has no errors") {
    auto findings = lint(load_default_library());
    for (const auto& f : findings) {
      CHECK_MESSAGE(f.severity != Severity::kError, f.rule_id << ": " << f.message);
    }
    CHECK_FALSE(has_errors(findings));
  }
  SUBCASE("duplicate effective rules") {
    json m = json::array({{{"lemma_in", {"may"}}}});
    json doc = {{"rules",
                 {{{"id", "one"}, {"group", "MODALITY"}, {"matchers", m}},
                  {{"id", "two"}, {"group", "MODALITY"}, {"matchers", m}}}}};
    auto f = findings_of(doc, LintKind::kDuplicate);
    REQUIRE(f.size() == 1);
    CHECK(f[0].severity == Severity::kError);
    CHECK(f[0].rule_id == "two");
  }
  SUBCASE("unreachable lexicon entry") {
    json doc = {{"lexicons", {{"modals", {"may", "might"}}}},
                {"rules",
                 {{{"id", "r"},
                   {"group", "MODALITY"},
                   {"matchers", {{{"lexicon_ref", "modals"}, {"lemma_in", {"may"}}}}}}}}};
    auto f = findings_of(doc, LintKind::kUnreachable);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "lexicon:modals");
    CHECK(f[0].message.find("might") != std::string::npos);
  }
  SUBCASE("unreferenced lexicon") {
    json doc = {{"lexicons", {{"orphan", {"x"}}}}, {"rules", json::array()}};
    CHECK(findings_of(doc, LintKind::kUnreachable).size() == 1);
  }
  SUBCASE("degenerate rules") {
    json doc = {{"rules",
                 {{{"id", "opt"}, {"group", "MODALITY"}, {"matchers", {{{"quantifier", "*"}}}}},
                  {{"id", "dot"}, {"group", "MODALITY"}, {"matchers", {{{"text_regex", ".*"}}}}}}}};
    auto f = findings_of(doc, LintKind::kDegenerate);
    CHECK(f.size() == 2);
    CHECK(has_errors(f));
  }
  SUBCASE("shadowed rule") {
    json doc = {{"rules",
                 {{{"id", "general"}, {"group", "MODALITY"}, {"matchers", {{{"lemma_in", {"may", "might"}}}}}},
                  {{"id", "narrow"}, {"group", "MODALITY"}, {"matchers", {{{"lemma_in", {"may"}}}}}}}}};
    auto f = findings_of(doc, LintKind::kShadowed);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "narrow");
    CHECK(f[0].severity == Severity::kWarning);
  }
}

TEST_CASE("coverage report") {
  auto lib = load_default_library();
  auto zero = coverage_report(lib, {});
  for (auto c : zero) CHECK(c == 0);

  auto exemplars = load_exemplars(kPatterns / "exemplars.json");
  std::vector<Document> corpus;
  std::set<std::string> seen;
  for (const auto& e : exemplars) {
    if (!seen.insert(e.sentence).second) continue;
    Document d;
    d.sentences.push_back(make_naive_sentence("e" + std::to_string(seen.size()), e.sentence));
    corpus.push_back(preprocess_document(d));
  }
  CHECK(corpus.size() == 24);
  auto counts = coverage_report(lib, corpus);
  for (auto g : kSuGroups) CHECK_MESSAGE(counts[static_cast<std::size_t>(g)] >= 1, group_name(g));

  // Definition: sum of per-sentence indicators.
  GroupCounts manual{};
  for (const auto& d : corpus) {
    for (const auto& s : d.sentences) {
      std::set<Group> groups;
      for (const auto& m : match_sentence(s, lib)) groups.insert(m.group);
      for (auto g : groups) manual[static_cast<std::size_t>(g)]++;
    }
  }
  CHECK(manual == counts);
}

TEST_CASE("exemplar fixture suite") {
  auto lib = load_default_library();
  auto exemplars = load_exemplars(kPatterns / "exemplars.json");
  CHECK(exemplars.size() >= 24);
  for (const auto& r : run_exemplars(lib, exemplars)) {
    CHECK_MESSAGE(r.matched, group_name(r.exemplar.group) << " '" << r.exemplar.cue << "'");
  }
}

TEST_CASE("asset loading") {
  SUBCASE("missing directory") {
    CHECK_THROWS_AS(load_library("/nonexistent/patterns"), LoadError);
  }
  SUBCASE("unknown asset file in a bundle") {
    auto assets = read_assets(kPatterns);
    assets["extra.json"] = json::object();
    CHECK_THROWS_AS(compile_assets(assets), CompileError);
  }
  SUBCASE("write then read round trip") {
    auto dir = fs::temp_directory_path() / "unscientify_assets_rt";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto assets = read_assets(kPatterns);
    write_assets(dir, assets);
    CHECK(load_library(dir).version() == load_library(kPatterns).version());
    fs::remove_all(dir);
  }
  SUBCASE("carryover markers come from the library") {
    auto lex = carryover_lexicon(load_default_library());
    CHECK(std::find(lex.first_person.begin(), lex.first_person.end(), "we") !=
          lex.first_person.end());
    CHECK_FALSE(lex.former_markers.empty());
  }
}
