#pragma once

// Batch annotation. The OpenMP kernels distribute sentences (or documents)
// across threads; the serial versions are the reference they are tested
// against.

#include <vector>

#include "unscientify/pipeline.hpp"

namespace unscientify {

// threads <= 0 uses the OpenMP default.
std::vector<Verdict> annotate_batch(const std::vector<Sentence>& sentences,
                                    const PatternLibrary& lib, int threads = 0);
std::vector<Verdict> annotate_batch_serial(const std::vector<Sentence>& sentences,
                                           const PatternLibrary& lib);

// Preprocesses each document (carryover stays per document) and annotates
// every sentence; output follows document then sentence order.
std::vector<Verdict> annotate_corpus(const std::vector<Document>& docs, const PatternLibrary& lib,
                                     int threads = 0);
std::vector<Verdict> annotate_corpus_serial(const std::vector<Document>& docs,
                                            const PatternLibrary& lib);

// Preprocessing only, parallel over documents.
std::vector<Document> prepare_corpus(const std::vector<Document>& docs, const PatternLibrary& lib,
                                     int threads = 0);

}  // namespace unscientify
