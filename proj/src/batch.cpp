#include "unscientify/batch.hpp"

#include <cstddef>

#include <omp.h>

namespace unscientify {

namespace {

int thread_count(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

}  // namespace

std::vector<Verdict> annotate_batch(const std::vector<Sentence>& sentences,
                                    const PatternLibrary& lib, int threads) {
  std::vector<Verdict> out(sentences.size());
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count(threads))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = annotate_sentence(sentences[static_cast<std::size_t>(i)], lib);
  }
  return out;
}

std::vector<Verdict> annotate_batch_serial(const std::vector<Sentence>& sentences,
                                           const PatternLibrary& lib) {
  std::vector<Verdict> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(annotate_sentence(s, lib));
  return out;
}

std::vector<Document> prepare_corpus(const std::vector<Document>& docs, const PatternLibrary& lib,
                                     int threads) {
  std::vector<Document> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(threads))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = prepare_document(docs[static_cast<std::size_t>(i)], lib);
  }
  return out;
}

std::vector<Verdict> annotate_corpus(const std::vector<Document>& docs, const PatternLibrary& lib,
                                     int threads) {
  std::vector<Sentence> flat;
  for (auto& d : prepare_corpus(docs, lib, threads)) {
    for (auto& s : d.sentences) flat.push_back(std::move(s));
  }
  return annotate_batch(flat, lib, threads);
}

std::vector<Verdict> annotate_corpus_serial(const std::vector<Document>& docs,
                                            const PatternLibrary& lib) {
  std::vector<Verdict> out;
  for (const auto& d : docs) {
    for (auto& v : annotate_document(prepare_document(d, lib), lib)) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace unscientify
