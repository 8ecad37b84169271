#pragma once

// Gold corpus loading, binary classification metrics and the determinism
// report.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unscientify/pipeline.hpp"
#include "unscientify/textmodel.hpp"

namespace unscientify {

enum class GoldLabel { kYes, kNo };

struct GoldRecord {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string text;
  GoldLabel label = GoldLabel::kNo;
  std::optional<AuthorialRef> authorial_ref;  // present iff label is YES and a ref column exists
  std::map<std::string, std::string> metadata;
};

// Which columns hold what. Alias tables map normalized (lowercased, trimmed)
// cell values to labels; the built-in aliases apply when a value is absent.
struct ColumnMapping {
  std::string sentence = "sentence";
  std::string label = "label";
  std::string authorial_ref;  // empty: the file has no reference column
  std::vector<std::string> metadata;
  char delimiter = '\0';  // '\0': tab if the header has one, else comma
  std::map<std::string, GoldLabel> label_aliases;
  std::map<std::string, AuthorialRef> ref_aliases;

  static ColumnMapping from_json(const nlohmann::json& j);  // throws LoadError
};

ColumnMapping load_mapping(const std::filesystem::path& path);

// Throws LoadError naming the row for unknown labels, YES rows without a
// reference, or ragged rows; missing mapped columns are reported by name.
std::vector<GoldRecord> load_gold(std::istream& in, const ColumnMapping& mapping,
                                  const std::string& source = "input");
std::vector<GoldRecord> load_gold(const std::filesystem::path& path, const ColumnMapping& mapping);

// Rows of a delimited file; quoted fields may contain delimiters, doubled
// quotes and newlines.
std::vector<std::vector<std::string>> parse_delimited(std::istream& in, char delimiter,
                                                      const std::string& source = "input");

// One single-sentence document per record (rows are independent sentences).
std::vector<Document> gold_documents(const std::vector<GoldRecord>& records);

struct Confusion {
  std::size_t tp = 0;  // gold YES, predicted UNCERTAINTY
  std::size_t fn = 0;  // gold YES, predicted CLAIM
  std::size_t fp = 0;  // gold NO, predicted UNCERTAINTY
  std::size_t tn = 0;  // gold NO, predicted CLAIM
  std::size_t total() const { return tp + fn + fp + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct LabelMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct EvalReport {
  Confusion confusion;
  LabelMetrics uncertainty;
  LabelMetrics claim;
  double accuracy = 0;
  std::size_t ref_agreement_total = 0;  // true positives with a gold reference
  std::size_t ref_agreement_hits = 0;
  double ref_agreement = 0;
  std::string library_version;

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

EvalReport compute_metrics(const Confusion& confusion);

// Throws ValidationError when lengths differ.
EvalReport compute_metrics(const std::vector<GoldRecord>& gold,
                           const std::vector<Verdict>& verdicts);

struct DeterminismReport {
  std::size_t n_runs = 0;
  std::size_t sentences = 0;
  std::size_t inconsistencies = 0;  // sentences whose serialized verdicts differ
  std::vector<std::string> inconsistent_ids;
  std::vector<std::string> library_versions;  // one per run
  bool versions_differ = false;

  nlohmann::ordered_json to_json() const;
};

// One run per library (runs = libraries.size()).
DeterminismReport determinism_check(const std::vector<Document>& docs,
                                    const std::vector<PatternLibrary>& libraries);
DeterminismReport determinism_check(const std::vector<Document>& docs, const PatternLibrary& lib,
                                    std::size_t n_runs);

}  // namespace unscientify
