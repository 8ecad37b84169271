#include "unscientify/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "unscientify/batch.hpp"
#include "unscientify/error.hpp"

namespace unscientify {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_cell(std::string_view s) { return to_lower(trim(s)); }

const std::map<std::string, GoldLabel>& builtin_labels() {
  static const std::map<std::string, GoldLabel> m = {
      {"yes", GoldLabel::kYes},        {"y", GoldLabel::kYes},
      {"1", GoldLabel::kYes},          {"true", GoldLabel::kYes},
      {"uncertainty", GoldLabel::kYes}, {"uncertain", GoldLabel::kYes},
      {"no", GoldLabel::kNo},          {"n", GoldLabel::kNo},
      {"0", GoldLabel::kNo},           {"false", GoldLabel::kNo},
      {"claim", GoldLabel::kNo},       {"certain", GoldLabel::kNo},
  };
  return m;
}

const std::map<std::string, AuthorialRef>& builtin_refs() {
  static const std::map<std::string, AuthorialRef> m = {
      {"author", AuthorialRef::kAuthor},
      {"authors", AuthorialRef::kAuthor},
      {"author(s)", AuthorialRef::kAuthor},
      {"self", AuthorialRef::kAuthor},
      {"1", AuthorialRef::kAuthor},
      {"former_study", AuthorialRef::kFormerStudy},
      {"former study", AuthorialRef::kFormerStudy},
      {"former studies", AuthorialRef::kFormerStudy},
      {"former study(s)", AuthorialRef::kFormerStudy},
      {"former/prev. study(s)", AuthorialRef::kFormerStudy},
      {"former/previous study", AuthorialRef::kFormerStudy},
      {"previous study", AuthorialRef::kFormerStudy},
      {"prev. study(s)", AuthorialRef::kFormerStudy},
      {"former", AuthorialRef::kFormerStudy},
      {"2", AuthorialRef::kFormerStudy},
      {"both", AuthorialRef::kBoth},
      {"3", AuthorialRef::kBoth},
  };
  return m;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

LabelMetrics label_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  LabelMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = m.precision + m.recall == 0 ? 0.0
                                     : 2 * m.precision * m.recall / (m.precision + m.recall);
  m.support = tp + fn;
  return m;
}

ordered_json metrics_json(const LabelMetrics& m) {
  ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["support"] = m.support;
  return j;
}

}  // namespace

ColumnMapping ColumnMapping::from_json(const json& j) {
  static const std::vector<std::string> kKeys = {"sentence", "label", "authorial_ref", "metadata",
                                                 "delimiter", "label_aliases", "ref_aliases"};
  if (!j.is_object()) throw LoadError("column mapping must be an object");
  ColumnMapping m;
  try {
    for (const auto& [key, value] : j.items()) {
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
        throw LoadError("column mapping: unknown field '" + key + "'");
      }
    }
    if (j.contains("sentence")) m.sentence = j["sentence"].get<std::string>();
    if (j.contains("label")) m.label = j["label"].get<std::string>();
    if (j.contains("authorial_ref") && !j["authorial_ref"].is_null()) {
      m.authorial_ref = j["authorial_ref"].get<std::string>();
    }
    if (j.contains("metadata")) m.metadata = j["metadata"].get<std::vector<std::string>>();
    if (j.contains("delimiter")) {
      auto d = j["delimiter"].get<std::string>();
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) throw LoadError("column mapping: delimiter must be one character");
      m.delimiter = d[0];
    }
    if (j.contains("label_aliases")) {
      for (const auto& [alias, target] : j["label_aliases"].items()) {
        auto t = normalize_cell(target.get<std::string>());
        if (t != "yes" && t != "no") {
          throw LoadError("column mapping: label alias target must be YES or NO");
        }
        m.label_aliases[normalize_cell(alias)] = t == "yes" ? GoldLabel::kYes : GoldLabel::kNo;
      }
    }
    if (j.contains("ref_aliases")) {
      for (const auto& [alias, target] : j["ref_aliases"].items()) {
        auto r = authorial_ref_from_string(trim(target.get<std::string>()));
        if (!r || *r == AuthorialRef::kNone) {
          throw LoadError("column mapping: ref alias target must be AUTHOR, FORMER_STUDY or BOTH");
        }
        m.ref_aliases[normalize_cell(alias)] = *r;
      }
    }
  } catch (const json::exception& e) {
    throw LoadError(std::string("column mapping: ") + e.what());
  }
  return m;
}

ColumnMapping load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read " + path.string());
  try {
    return ColumnMapping::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

std::vector<std::vector<std::string>> parse_delimited(std::istream& in, char delimiter,
                                                      const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\n') {
      end_row();
      ++line;
    } else if (c == '\r') {
      if (in.peek() != '\n') {
        end_row();
        ++line;
      }
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw LoadError(source + ": line " + std::to_string(line) + ": unterminated quote");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::vector<GoldRecord> load_gold(std::istream& in, const ColumnMapping& mapping,
                                  const std::string& source) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.rfind("\xEF\xBB\xBF", 0) == 0) content.erase(0, 3);
  char delim = mapping.delimiter;
  if (delim == '\0') {
    auto header_end = content.find('\n');
    delim = content.substr(0, header_end).find('\t') != std::string::npos ? '\t' : ',';
  }
  std::istringstream ss(content);
  auto rows = parse_delimited(ss, delim, source);
  if (rows.empty()) throw LoadError(source + ": missing header row");
  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw LoadError(source + ": missing mapped column '" + name + "'");
  };
  const std::size_t sentence_col = column(mapping.sentence);
  const std::size_t label_col = column(mapping.label);
  std::optional<std::size_t> ref_col;
  if (!mapping.authorial_ref.empty()) ref_col = column(mapping.authorial_ref);
  std::vector<std::pair<std::string, std::size_t>> meta_cols;
  for (const auto& name : mapping.metadata) meta_cols.emplace_back(name, column(name));

  std::vector<GoldRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = source + ": row " + std::to_string(r);
    if (row.size() != header.size()) {
      throw LoadError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(row.size()));
    }
    GoldRecord rec;
    rec.row = r;
    rec.text = trim(row[sentence_col]);
    const std::string label = normalize_cell(row[label_col]);
    if (auto it = mapping.label_aliases.find(label); it != mapping.label_aliases.end()) {
      rec.label = it->second;
    } else if (auto b = builtin_labels().find(label); b != builtin_labels().end()) {
      rec.label = b->second;
    } else {
      throw LoadError(where + ": unknown label '" + trim(row[label_col]) + "'");
    }
    if (ref_col && rec.label == GoldLabel::kYes) {
      const std::string ref = normalize_cell(row[*ref_col]);
      if (ref.empty()) throw LoadError(where + ": uncertainty row without authorial reference");
      if (auto it = mapping.ref_aliases.find(ref); it != mapping.ref_aliases.end()) {
        rec.authorial_ref = it->second;
      } else if (auto b = builtin_refs().find(ref); b != builtin_refs().end()) {
        rec.authorial_ref = b->second;
      } else {
        throw LoadError(where + ": unknown authorial reference '" + trim(row[*ref_col]) + "'");
      }
    }
    for (const auto& [name, col] : meta_cols) rec.metadata[name] = trim(row[col]);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<GoldRecord> load_gold(const std::filesystem::path& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  return load_gold(in, mapping, path.string());
}

std::vector<Document> gold_documents(const std::vector<GoldRecord>& records) {
  std::vector<Document> docs;
  docs.reserve(records.size());
  for (const auto& r : records) {
    Document d;
    d.id = "row-" + std::to_string(r.row);
    d.sentences.push_back(make_naive_sentence("r" + std::to_string(r.row), r.text));
    d.metadata = r.metadata;
    docs.push_back(std::move(d));
  }
  return docs;
}

EvalReport compute_metrics(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  r.uncertainty = label_metrics(c.tp, c.fp, c.fn);
  r.claim = label_metrics(c.tn, c.fn, c.fp);
  r.accuracy = ratio(c.tp + c.tn, c.total());
  return r;
}

EvalReport compute_metrics(const std::vector<GoldRecord>& gold,
                           const std::vector<Verdict>& verdicts) {
  if (gold.size() != verdicts.size()) {
    throw ValidationError("gold has " + std::to_string(gold.size()) + " rows but " +
                          std::to_string(verdicts.size()) + " verdicts were given");
  }
  Confusion c;
  std::size_t ref_total = 0;
  std::size_t ref_hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool gold_yes = gold[i].label == GoldLabel::kYes;
    const bool pred_yes = verdicts[i].label == Label::kUncertainty;
    if (gold_yes && pred_yes) {
      ++c.tp;
      if (gold[i].authorial_ref) {
        ++ref_total;
        if (*gold[i].authorial_ref == verdicts[i].authorial_ref) ++ref_hits;
      }
    } else if (gold_yes) {
      ++c.fn;
    } else if (pred_yes) {
      ++c.fp;
    } else {
      ++c.tn;
    }
  }
  EvalReport r = compute_metrics(c);
  r.ref_agreement_total = ref_total;
  r.ref_agreement_hits = ref_hits;
  r.ref_agreement = ratio(ref_hits, ref_total);
  if (!verdicts.empty()) r.library_version = verdicts.front().library_version;
  return r;
}

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["library_version"] = library_version;
  j["confusion"] = {{"tp", confusion.tp}, {"fn", confusion.fn}, {"fp", confusion.fp},
                    {"tn", confusion.tn}};
  j["uncertainty"] = metrics_json(uncertainty);
  j["claim"] = metrics_json(claim);
  j["accuracy"] = accuracy;
  j["total"] = confusion.total();
  j["authorial_ref_agreement"] = {{"rate", ref_agreement},
                                  {"agreeing", ref_agreement_hits},
                                  {"evaluated", ref_agreement_total}};
  return j;
}

std::string EvalReport::to_table() const {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %9s\n", "label", "precision", "recall",
                "f1-score", "support");
  out += buf;
  auto row = [&](const char* name, const LabelMetrics& m) {
    std::snprintf(buf, sizeof buf, "%-12s %9.3f %9.3f %9.3f %9zu\n", name, m.precision, m.recall,
                  m.f1, m.support);
    out += buf;
  };
  row("UNCERTAINTY", uncertainty);
  row("CLAIM", claim);
  std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9.3f %9zu\n", "accuracy", "", "", accuracy,
                confusion.total());
  out += buf;
  std::snprintf(buf, sizeof buf, "authorial-ref agreement on true positives: %.3f (%zu/%zu)\n",
                ref_agreement, ref_agreement_hits, ref_agreement_total);
  out += buf;
  out += "library_version: " + library_version + "\n";
  return out;
}

ordered_json DeterminismReport::to_json() const {
  ordered_json j;
  j["n_runs"] = n_runs;
  j["sentences"] = sentences;
  j["inconsistencies"] = inconsistencies;
  j["inconsistent_ids"] = inconsistent_ids;
  j["library_versions"] = library_versions;
  j["versions_differ"] = versions_differ;
  return j;
}

DeterminismReport determinism_check(const std::vector<Document>& docs,
                                    const std::vector<PatternLibrary>& libraries) {
  DeterminismReport rep;
  rep.n_runs = libraries.size();
  std::vector<std::vector<std::string>> runs;
  for (const auto& lib : libraries) {
    rep.library_versions.push_back(lib.version());
    std::vector<std::string> lines;
    for (const auto& v : annotate_corpus(docs, lib)) lines.push_back(verdict_to_line(v));
    runs.push_back(std::move(lines));
  }
  if (runs.empty()) return rep;
  rep.sentences = runs.front().size();
  for (std::size_t i = 0; i < rep.sentences; ++i) {
    bool same = std::all_of(runs.begin(), runs.end(), [&](const auto& run) {
      return i < run.size() && run[i] == runs.front()[i];
    });
    if (!same) {
      ++rep.inconsistencies;
      rep.inconsistent_ids.push_back(json::parse(runs.front()[i])["sentence_id"].get<std::string>());
    }
  }
  rep.versions_differ =
      std::adjacent_find(rep.library_versions.begin(), rep.library_versions.end(),
                         std::not_equal_to<>()) != rep.library_versions.end();
  return rep;
}

DeterminismReport determinism_check(const std::vector<Document>& docs, const PatternLibrary& lib,
                                    std::size_t n_runs) {
  return determinism_check(docs, std::vector<PatternLibrary>(n_runs, lib));
}

}  // namespace unscientify
