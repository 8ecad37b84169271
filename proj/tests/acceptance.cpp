// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any line fails.
//
// The corpus criteria read the gold file from argv[1] (mapping argv[2]) or
// from UNSCIENTIFY_GOLD / UNSCIENTIFY_GOLD_MAPPING.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "generators.hpp"
#include "golden.hpp"
#include "oracle.hpp"
#include "unscientify/batch.hpp"
#include "unscientify/evaluation.hpp"
#include "unscientify/knowledge.hpp"
#include "unscientify/pattern.hpp"
#include "unscientify/pipeline.hpp"
#include "unscientify/preprocess.hpp"

using namespace unscientify;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kGoldenBudgetSeconds = 1.0;
constexpr double kMinAccuracy = 0.75;
constexpr double kMinRecall = 0.90;
constexpr double kCorpusBudgetSeconds = 60.0;
constexpr int kDeterminismRuns = 3;
constexpr int kOracleCases = 10000;
constexpr double kOracleBudgetSeconds = 30.0;
constexpr int kCitationCases = 1000;
constexpr double kMetricTolerance = 0.001;
constexpr double kMinSentencesPerSecond = 1000.0;
constexpr std::size_t kThroughputSentences = 5000;

const fs::path kPatterns = UNSCIENTIFY_TEST_PATTERNS;
const fs::path kFixtureCorpus = fs::path(UNSCIENTIFY_TEST_CORPORA) / "fixtures.txt";

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << x;
  return ss.str();
}

struct GoldInput {
  fs::path gold;
  fs::path mapping;
};

std::optional<GoldInput> gold_input(int argc, char** argv) {
  GoldInput in;
  if (argc > 1) {
    in.gold = argv[1];
    if (argc > 2) in.mapping = argv[2];
  } else if (const char* g = std::getenv("UNSCIENTIFY_GOLD")) {
    in.gold = g;
    if (const char* m = std::getenv("UNSCIENTIFY_GOLD_MAPPING")) in.mapping = m;
  } else {
    return std::nullopt;
  }
  return in;
}

std::vector<GoldRecord> read_gold(const GoldInput& in) {
  ColumnMapping mapping;
  if (!in.mapping.empty()) mapping = load_mapping(in.mapping);
  return load_gold(in.gold, mapping);
}

std::vector<Document> fixture_documents() {
  std::ifstream in(kFixtureCorpus);
  std::vector<Document> docs;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    docs.push_back(naive_tokenize(line, "f" + std::to_string(docs.size())));
  }
  return docs;
}

Outcome golden_suite(const PatternLibrary& lib) {
  auto t0 = Clock::now();
  std::size_t failures = 0, checks = 0;
  for (const auto& row : golden::sample_table()) {
    auto v = annotate_text(row.text, lib);
    ++checks;
    if (v.size() != 1 || v[0].label != row.label || v[0].authorial_ref != row.ref) ++failures;
  }
  for (const auto& text : golden::cancellation_sentences()) {
    auto v = annotate_text(text, lib);
    ++checks;
    if (v.size() != 1 || v[0].label != Label::kClaim || v[0].canceled.empty()) ++failures;
  }
  for (const auto& r : run_exemplars(lib, load_exemplars(kPatterns / "exemplars.json"))) {
    ++checks;
    if (!r.matched) ++failures;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < kGoldenBudgetSeconds,
          std::to_string(checks - failures) + "/" + std::to_string(checks) + " in " + fmt(secs) +
              "s"};
}

Outcome demo(const PatternLibrary& lib) {
  auto v = annotate_text(golden::demo_paragraph(), lib);
  const std::vector<Label> labels = {Label::kUncertainty, Label::kUncertainty, Label::kUncertainty,
                                     Label::kClaim, Label::kUncertainty};
  const std::vector<AuthorialRef> refs = {AuthorialRef::kAuthor, AuthorialRef::kFormerStudy,
                                          AuthorialRef::kFormerStudy, AuthorialRef::kNone,
                                          AuthorialRef::kAuthor};
  bool ok = v.size() == labels.size();
  for (std::size_t i = 0; ok && i < v.size(); ++i) {
    ok = v[i].label == labels[i] && v[i].authorial_ref == refs[i] &&
         check_invariants(v[i]).empty();
  }
  ok = ok && v[0].explanation == golden::demo_first_explanation();
  return {ok, std::to_string(v.size()) + " sentences"};
}

Outcome corpus_thresholds(const std::optional<GoldInput>& in, const PatternLibrary& lib) {
  if (!in) {
    return {false, "no gold corpus (set UNSCIENTIFY_GOLD) library_version=" + lib.version()};
  }
  auto t0 = Clock::now();
  auto gold = read_gold(*in);
  auto report = compute_metrics(gold, annotate_corpus(gold_documents(gold), lib));
  const double secs = seconds_since(t0);
  return {report.accuracy >= kMinAccuracy && report.uncertainty.recall >= kMinRecall &&
              secs < kCorpusBudgetSeconds,
          "accuracy=" + fmt(report.accuracy) + " recall=" + fmt(report.uncertainty.recall) +
              " n=" + std::to_string(gold.size()) + " in " + fmt(secs) +
              "s library_version=" + lib.version()};
}

Outcome paper_faithful(const std::optional<GoldInput>& in, const PatternLibrary& lib,
                       const PatternLibrary& faithful) {
  bool ok = true;
  for (const auto& text : golden::error_analysis_sentences()) {
    auto d = annotate_text(text, lib);
    auto f = annotate_text(text, faithful);
    ok = ok && d.size() == 1 && f.size() == 1 && d[0].label == Label::kUncertainty &&
         f[0].label == Label::kClaim;
  }
  std::string detail = "error-analysis sentences missed only in faithful mode";
  if (in) {
    // Faithful mode may only lose true positives relative to the default.
    auto gold = read_gold(*in);
    auto docs = gold_documents(gold);
    auto a = compute_metrics(gold, annotate_corpus(docs, lib));
    auto b = compute_metrics(gold, annotate_corpus(docs, faithful));
    ok = ok && b.confusion.tp <= a.confusion.tp;
    detail += "; corpus tp " + std::to_string(a.confusion.tp) + " vs faithful " +
              std::to_string(b.confusion.tp);
  }
  return {ok, detail};
}

Outcome determinism(const std::optional<GoldInput>& in, const PatternLibrary& lib) {
  std::vector<Document> docs;
  std::string source;
  if (in) {
    docs = gold_documents(read_gold(*in));
    source = "gold corpus";
  } else {
    docs = fixture_documents();
    source = "fixture corpus (gold corpus absent)";
  }
  auto r = determinism_check(docs, lib, kDeterminismRuns);
  return {r.inconsistencies == 0 && !r.versions_differ && r.sentences > 0,
          std::to_string(r.n_runs) + " runs over " + std::to_string(r.sentences) +
              " sentences of the " + source + ", " + std::to_string(r.inconsistencies) +
              " inconsistent"};
}

Outcome matcher_oracle() {
  auto t0 = Clock::now();
  gen::Rng rng(20240611);
  std::size_t mismatches = 0;
  for (int i = 0; i < kOracleCases; ++i) {
    auto rule = gen::random_rule(rng, "r" + std::to_string(i));
    auto sentence = gen::random_sentence(rng, 15, "s" + std::to_string(i));
    auto got = match_sentence(sentence, compile_json(rule.source));
    if (got != oracle::brute_force_match(sentence, rule.rule, gen::lexicons())) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < kOracleBudgetSeconds,
          std::to_string(kOracleCases) + " cases, " + std::to_string(mismatches) +
              " mismatches in " + fmt(secs) + "s"};
}

Outcome citations() {
  struct Fixed {
    std::string text;
    std::string expected;
    CitationStyle style;
  };
  const std::vector<Fixed> fixed = {
      {"Shown before [1, 2, 5].", "Shown before @CITATION.", CitationStyle::kNumericBracket},
      {"Shown before (see Max & Betty, 2002a; Marshal & Mansell, 2001).",
       "Shown before @CITATION.", CitationStyle::kParentheticalAuthorYear},
      {"James et al. (2005) showed it.", "@CITATION showed it.",
       CitationStyle::kNarrativeAuthorYear},
  };
  std::size_t failures = 0;
  for (const auto& f : fixed) {
    auto r = standardize_citations(f.text);
    if (r.text != f.expected || r.citations.size() != 1 || r.citations[0].style != f.style) {
      ++failures;
    }
  }
  gen::Rng rng(1234);
  for (int i = 0; i < kCitationCases; ++i) {
    auto c = gen::random_citation_text(rng);
    auto r = standardize_citations(c.text);
    bool ok = r.citations.size() == c.blocks.size() &&
              standardize_citations(r.text).text == r.text;
    for (std::size_t k = 0; ok && k < c.blocks.size(); ++k) {
      ok = r.citations[k].original_text == c.blocks[k].first &&
           r.citations[k].style == c.blocks[k].second;
    }
    failures += ok ? 0 : 1;
  }
  return {failures == 0, std::to_string(fixed.size()) + " fixed + " +
                             std::to_string(kCitationCases) + " random, " +
                             std::to_string(failures) + " failures"};
}

Outcome metrics_identity() {
  auto r = compute_metrics(Confusion{415, 19, 168, 373});
  const bool ok = std::abs(r.uncertainty.precision - 0.712) <= kMetricTolerance &&
                  std::abs(r.uncertainty.recall - 0.956) <= kMetricTolerance &&
                  std::abs(r.accuracy - 0.808) <= kMetricTolerance;
  return {ok, "P=" + fmt(r.uncertainty.precision) + " R=" + fmt(r.uncertainty.recall) +
                  " acc=" + fmt(r.accuracy)};
}

Outcome throughput(const PatternLibrary& lib) {
  std::vector<Sentence> base;
  for (const auto& doc : prepare_corpus(fixture_documents(), lib, 1)) {
    for (const auto& s : doc.sentences) base.push_back(s);
  }
  if (base.empty()) return {false, "fixture corpus is empty"};
  std::vector<Sentence> sentences;
  sentences.reserve(kThroughputSentences);
  while (sentences.size() < kThroughputSentences) {
    sentences.push_back(base[sentences.size() % base.size()]);
  }
  auto t0 = Clock::now();
  auto verdicts = annotate_batch_serial(sentences, lib);
  const double secs = seconds_since(t0);
  const double rate = static_cast<double>(verdicts.size()) / secs;
  return {rate >= kMinSentencesPerSecond,
          fmt(rate, 0) + " sentences/s single-threaded over " +
              std::to_string(verdicts.size()) + " sentences"};
}

}  // namespace

int main(int argc, char** argv) {
  const auto lib = load_default_library();
  const auto faithful = load_default_library(true);
  const auto gold = gold_input(argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"golden micro-suite", [&] { return golden_suite(lib); }},
      {"demo reproduction", [&] { return demo(lib); }},
      {"corpus accuracy and recall thresholds", [&] { return corpus_thresholds(gold, lib); }},
      {"paper-faithful mode misses the error-analysis sentences",
       [&] { return paper_faithful(gold, lib, faithful); }},
      {"determinism", [&] { return determinism(gold, lib); }},
      {"matcher equals oracle", [] { return matcher_oracle(); }},
      {"citation standardization", [] { return citations(); }},
      {"metric identities on the reference confusion matrix", [] { return metrics_identity(); }},
      {"single-threaded throughput", [&] { return throughput(lib); }},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ")\n";
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
