#include <doctest.h>

#include <fstream>

#include "golden.hpp"
#include "unscientify/batch.hpp"
#include "unscientify/error.hpp"
#include "unscientify/knowledge.hpp"
#include "unscientify/pipeline.hpp"
#include "unscientify/preprocess.hpp"

using namespace unscientify;

namespace {

const PatternLibrary& lib() {
  static const PatternLibrary kLib = load_default_library();
  return kLib;
}

Verdict one(const std::string& text, const PatternLibrary& l = lib()) {
  auto verdicts = annotate_text(text, l);
  REQUIRE(verdicts.size() == 1);
  return verdicts[0];
}

Sentence prepared(const std::string& text) {
  return preprocess_sentence(make_naive_sentence("s", text));
}

}  // namespace

TEST_CASE("sample table rows") {
  for (const auto& row : golden::sample_table()) {
    auto v = one(row.text);
    INFO(row.text);
    CHECK(v.label == row.label);
    CHECK(v.authorial_ref == row.ref);
    CHECK(check_invariants(v).empty());
  }
}

TEST_CASE("sample table rows from annotated input") {
  std::ifstream in(std::string(UNSCIENTIFY_TEST_FIXTURES) + "/possible.conllu");
  auto doc = parse_conllu(in);
  auto v = annotate_document(prepare_document(doc, lib()), lib());
  REQUIRE(v.size() == 1);
  CHECK(v[0].label == Label::kUncertainty);
  CHECK(v[0].authorial_ref == AuthorialRef::kAuthor);

  std::ifstream in2(std::string(UNSCIENTIFY_TEST_FIXTURES) + "/annotated.conllu");
  auto doc2 = parse_conllu(in2);
  auto v2 = annotate_document(prepare_document(doc2, lib()), lib());
  REQUIRE(v2.size() == 3);
  CHECK(v2[0].label == Label::kUncertainty);
  CHECK(v2[0].su_spans.at(0).matched_text == "remains controversial");
  CHECK(v2[1].label == Label::kUncertainty);  // can + not + be generalized
  CHECK(v2[1].su_spans.at(0).group == Group::kNonGeneralizable);
  CHECK(v2[2].label == Label::kUncertainty);
  CHECK(v2[2].authorial_ref == AuthorialRef::kFormerStudy);
}

TEST_CASE("cancellation") {
  SUBCASE("rebuttal") {
    auto v = one(golden::cancellation_sentences()[0]);
    CHECK(v.label == Label::kClaim);
    CHECK(v.authorial_ref == AuthorialRef::kNone);
    REQUIRE_FALSE(v.canceled.empty());
    CHECK(v.canceled[0].cue.group == Group::kHypothesis);
    CHECK(v.canceled[0].cancellation.group == Group::kRebuttal);
    CHECK(v.explanation.find("'hypothesis'") != std::string::npos);
    CHECK(v.explanation.find("no evidence to support") != std::string::npos);
    CHECK(v.explanation.rfind("Uncertainty cue '", 0) == 0);
  }
  SUBCASE("confirmation") {
    auto v = one(golden::cancellation_sentences()[1]);
    CHECK(v.label == Label::kClaim);
    REQUIRE_FALSE(v.canceled.empty());
    CHECK(v.canceled[0].cancellation.group == Group::kConfirmation);
  }
  SUBCASE("cancellation dominates every span") {
    auto s = prepared(
        "We believe that it may possibly be unclear, but in order to test whether it holds we "
        "examined whether the data may fit.");
    auto su = collect_su_spans(s, lib());
    CHECK(su.size() >= 2);
    auto cc = check_complex(s, su, lib());
    CHECK(cc.surviving.empty());
    CHECK(cc.canceled.size() == su.size());
    for (const auto& p : cc.canceled) CHECK(is_cancellation_group(p.cancellation.group));
  }
  SUBCASE("no cancellation is the identity") {
    auto s = prepared("It remains unclear whether X may drive Y.");
    auto su = collect_su_spans(s, lib());
    auto cc = check_complex(s, su, lib());
    CHECK(cc.surviving == su);
    CHECK(cc.canceled.empty());
  }
}

TEST_CASE("authorial reference") {
  CHECK(one("We assume, consistent with Smith (2010), that X may drive Y.").authorial_ref ==
        AuthorialRef::kBoth);
  CHECK(one("We assume, consistent with @CITATION, that X may drive Y.").authorial_ref ==
        AuthorialRef::kBoth);
  CHECK(one("It is possible that X drives Y.").authorial_ref == AuthorialRef::kAuthor);
  CHECK(one("Previous studies suggest that X may drive Y.").authorial_ref ==
        AuthorialRef::kFormerStudy);
  CHECK(one("We suspect that X may drive Y.").authorial_ref == AuthorialRef::kAuthor);

  SUBCASE("carryover flags count only without local evidence") {
    auto doc = naive_tokenize(
        "Smith et al. (2019) measured X. They suggested that it may be unstable. "
        "They suggested, as we do, that it may be unstable.");
    auto v = annotate_document(prepare_document(doc, lib()), lib());
    REQUIRE(v.size() == 3);
    CHECK(v[1].authorial_ref == AuthorialRef::kFormerStudy);
    CHECK(v[2].authorial_ref == AuthorialRef::kAuthor);  // local "we" outranks carryover
  }
}

TEST_CASE("name mentions") {
  auto spans_of = [](const std::string& text) {
    return detect_name_mentions(make_naive_sentence("s", text));
  };
  auto a = spans_of("Medlock and Briscoe's (2007) model struggled with hedges.");
  REQUIRE(a.size() == 1);
  CHECK(a[0].matched_text.find("Medlock") == 0);
  CHECK(a[0].group == Group::kFormerRef);
  CHECK(spans_of("The Pacific Ocean is large.").empty());
  auto b = spans_of("James et al. found X.");
  REQUIRE(b.size() == 1);
  CHECK(b[0].matched_text.find("James") == 0);
  CHECK(spans_of("In 2005 (2005) nothing.").empty());
}

TEST_CASE("explanations") {
  SUBCASE("uncertainty template") {
    auto v = one("The mechanism by which these proteins bind to chromatin remains unexplained.");
    CHECK(v.explanation == golden::demo_first_explanation());
  }
  SUBCASE("plain claim") {
    auto v = one("We measured binding affinity at five different temperatures.");
    CHECK(v.label == Label::kClaim);
    CHECK(v.explanation == "No scientific uncertainty pattern matched.");
  }
  SUBCASE("several spans joined") {
    auto v = one("We believe that this remains unclear.");
    CHECK(v.su_spans.size() >= 2);
    CHECK(v.explanation.find("; ") != std::string::npos);
    CHECK(v.explanation.find("Subjectivity") != std::string::npos);
  }
}

TEST_CASE("demo paragraph") {
  auto v = annotate_text(golden::demo_paragraph(), lib());
  REQUIRE(v.size() == 5);
  std::size_t uncertain = 0, former = 0;
  for (const auto& x : v) {
    uncertain += x.label == Label::kUncertainty ? 1 : 0;
    former += x.authorial_ref == AuthorialRef::kFormerStudy ? 1 : 0;
    CHECK(check_invariants(x).empty());
  }
  CHECK(uncertain == 4);
  CHECK(former == 2);
  CHECK(v[0].explanation == golden::demo_first_explanation());
  CHECK(v[3].label == Label::kClaim);
}

TEST_CASE("paper-faithful switch") {
  auto faithful = load_default_library(true);
  for (const auto& text : golden::error_analysis_sentences()) {
    CHECK(one(text).label == Label::kUncertainty);
    CHECK(one(text, faithful).label == Label::kClaim);
  }
}

TEST_CASE("degenerate and empty input") {
  CHECK(annotate_text("", lib()).empty());
  Sentence empty;
  empty.id = "e";
  auto v = annotate_sentence(empty, lib());
  CHECK(v.label == Label::kClaim);
  CHECK(v.su_spans.empty());
  Document d;
  CHECK(annotate_document(d, lib()).empty());
}

TEST_CASE("span consolidation keeps the widest same-group span") {
  auto s = prepared("It remains highly unclear.");
  auto spans = collect_su_spans(s, lib());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t j = 0; j < spans.size(); ++j) {
      if (i == j || spans[i].group != spans[j].group) continue;
      bool contained = spans[j].start_token <= spans[i].start_token &&
                       spans[i].end_token <= spans[j].end_token;
      CHECK_FALSE(contained);
    }
  }
}

TEST_CASE("invariant checker catches broken verdicts") {
  Verdict v;
  v.label = Label::kUncertainty;
  CHECK_FALSE(check_invariants(v).empty());
  v.label = Label::kClaim;
  v.authorial_ref = AuthorialRef::kAuthor;
  CHECK_FALSE(check_invariants(v).empty());
}

TEST_CASE("verdict serialization") {
  auto v = one("Previous meta-analyses suggest that X may drive Y [3].");
  auto j = verdict_to_json(v);
  for (const char* key : {"sentence_id", "label", "spans", "canceled", "authorial_ref",
                          "explanation", "library_version", "text_checksum"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  for (const auto& span : j["spans"]) {
    for (const char* key : {"start", "end", "group", "pattern_id", "text"}) CHECK(span.contains(key));
  }
  CHECK(verdict_from_json(nlohmann::json::parse(verdict_to_line(v))) == v);
  auto bad = nlohmann::json::parse(verdict_to_line(v));
  bad["label"] = "MAYBE";
  CHECK_THROWS_AS(verdict_from_json(bad), ValidationError);
  CHECK(verdict_to_line(v).find('\n') == std::string::npos);
}

TEST_CASE("permuting documents permutes outputs") {
  std::vector<Document> docs = {naive_tokenize("It may rain. We stayed.", "a"),
                                naive_tokenize("Smith et al. (2001) doubt it. They may be wrong.", "b"),
                                naive_tokenize("No hedges here.", "c")};
  auto forward = annotate_corpus_serial(docs, lib());
  std::vector<Document> swapped = {docs[2], docs[0], docs[1]};
  auto permuted = annotate_corpus_serial(swapped, lib());
  REQUIRE(permuted.size() == forward.size());
  CHECK(permuted[0] == forward[4]);
  CHECK(permuted[1] == forward[0]);
  CHECK(permuted[2] == forward[1]);
  CHECK(permuted[3] == forward[2]);
  CHECK(permuted[4] == forward[3]);
}
