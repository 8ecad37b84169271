#include <doctest.h>

#include <fstream>

#include "generators.hpp"
#include "unscientify/batch.hpp"
#include "unscientify/knowledge.hpp"

using namespace unscientify;

namespace {

std::vector<Document> fixture_corpus() {
  std::ifstream in(std::string(UNSCIENTIFY_TEST_CORPORA) + "/fixtures.txt");
  REQUIRE(in);
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    docs.push_back(naive_tokenize(line, "d" + std::to_string(docs.size())));
  }
  return docs;
}

}  // namespace

TEST_CASE("parallel corpus annotation equals the serial reference") {
  auto lib = load_default_library();
  auto docs = fixture_corpus();
  REQUIRE(docs.size() > 20);
  auto serial = annotate_corpus_serial(docs, lib);
  for (int threads : {0, 1, 2, 4}) {
    CHECK(annotate_corpus(docs, lib, threads) == serial);
  }
}

TEST_CASE("parallel sentence batch equals the serial reference") {
  auto lib = load_default_library();
  gen::Rng rng(3);
  std::vector<Sentence> sentences;
  for (int i = 0; i < 1000; ++i) {
    sentences.push_back(preprocess_sentence(gen::random_sentence(rng, 15, "s" + std::to_string(i))));
  }
  auto serial = annotate_batch_serial(sentences, lib);
  CHECK(annotate_batch(sentences, lib, 3) == serial);
  CHECK(annotate_batch({}, lib).empty());
}

TEST_CASE("prepare_corpus keeps carryover per document") {
  auto lib = load_default_library();
  std::vector<Document> docs = {naive_tokenize("Smith et al. (2001) said X.", "a"),
                                naive_tokenize("They said Y.", "b")};
  auto prepared = prepare_corpus(docs, lib, 2);
  REQUIRE(prepared.size() == 2);
  CHECK(prepared[1].sentences[0].carryover_flags == Carryover::kNone);
}
