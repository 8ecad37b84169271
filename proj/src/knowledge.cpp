#include "unscientify/knowledge.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "unscientify/error.hpp"

#ifndef UNSCIENTIFY_DEFAULT_PATTERNS
#define UNSCIENTIFY_DEFAULT_PATTERNS "patterns"
#endif

namespace unscientify {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool required(const TokenMatcher& m) {
  return m.quantifier == Quantifier::kOne || m.quantifier == Quantifier::kPlus;
}

// Phrases a matcher can consume, or nullopt when it is not phrase-restricted.
std::optional<std::set<std::string>> phrase_set(const TokenMatcher& m, const LexiconMap& lex) {
  std::optional<std::set<std::string>> out;
  if (m.lexicon_ref) {
    auto it = lex.find(*m.lexicon_ref);
    out.emplace(it->second.begin(), it->second.end());
  }
  if (m.lemma_in) {
    std::set<std::string> lemmas(m.lemma_in->begin(), m.lemma_in->end());
    if (out) {
      std::set<std::string> both;
      std::set_intersection(out->begin(), out->end(), lemmas.begin(), lemmas.end(),
                            std::inserter(both, both.end()));
      out = std::move(both);
    } else {
      out = std::move(lemmas);
    }
  }
  return out;
}

template <typename T>
bool subset(const std::vector<T>& a, const std::vector<T>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Every token sequence accepted by `narrow` is accepted by `wide`.
bool matcher_covers(const TokenMatcher& wide, const TokenMatcher& narrow, const LexiconMap& lex) {
  if (wide.quantifier != narrow.quantifier) return false;
  if (wide.text_exact) {
    if (!narrow.text_exact) return false;
    if (wide.case_sensitive && !narrow.case_sensitive) return false;
    if (to_lower(*wide.text_exact) != to_lower(*narrow.text_exact)) return false;
    if (wide.case_sensitive && *wide.text_exact != *narrow.text_exact) return false;
  }
  if (wide.text_regex && narrow.text_regex != wide.text_regex) return false;
  auto wp = phrase_set(wide, lex);
  if (wp) {
    auto np = phrase_set(narrow, lex);
    if (!np || !std::includes(wp->begin(), wp->end(), np->begin(), np->end())) return false;
  }
  if (wide.upos_in) {
    if (!narrow.upos_in || !subset(*narrow.upos_in, *wide.upos_in)) return false;
  }
  if (wide.upos_not_in) {
    bool excluded = narrow.upos_not_in && subset(*wide.upos_not_in, *narrow.upos_not_in);
    if (!excluded && narrow.upos_in) {
      excluded = std::none_of(narrow.upos_in->begin(), narrow.upos_in->end(), [&](Upos u) {
        return std::find(wide.upos_not_in->begin(), wide.upos_not_in->end(), u) !=
               wide.upos_not_in->end();
      });
    }
    if (!excluded) return false;
  }
  if (!subset(wide.morph_all, narrow.morph_all)) return false;
  if (wide.dep_in && (!narrow.dep_in || !subset(*narrow.dep_in, *wide.dep_in))) return false;
  if (wide.head_lemma_in &&
      (!narrow.head_lemma_in || !subset(*narrow.head_lemma_in, *wide.head_lemma_in))) {
    return false;
  }
  return true;
}

bool rule_covers(const PatternRule& wide, const PatternRule& narrow, const LexiconMap& lex) {
  if (wide.group != narrow.group || wide.matchers.size() != narrow.matchers.size()) return false;
  if (wide.max_span_tokens < narrow.max_span_tokens) return false;
  for (std::size_t i = 0; i < wide.matchers.size(); ++i) {
    if (!matcher_covers(wide.matchers[i], narrow.matchers[i], lex)) return false;
  }
  return true;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw LoadError("cannot read " + path.string());
  return ss.str();
}

std::vector<std::string> lexicon_or(const PatternLibrary& lib, const std::string& name,
                                    std::vector<std::string> fallback) {
  auto it = lib.lexicons().find(name);
  return it == lib.lexicons().end() ? fallback : it->second;
}

}  // namespace

fs::path default_patterns_dir() {
  if (const char* env = std::getenv("UNSCIENTIFY_PATTERNS"); env != nullptr && *env != '\0') {
    return env;
  }
  return UNSCIENTIFY_DEFAULT_PATTERNS;
}

AssetBundle read_assets(const fs::path& dir) {
  AssetBundle out;
  for (auto name : kAssetFiles) {
    const fs::path path = dir / name;
    std::string text = read_file(path);
    try {
      out[std::string(name)] = json::parse(text);
    } catch (const json::parse_error& e) {
      throw CompileError("", std::string(name), std::string("malformed JSON: ") + e.what());
    }
  }
  return out;
}

void write_assets(const fs::path& dir, const AssetBundle& assets) {
  fs::create_directories(dir);
  for (const auto& [name, doc] : assets) {
    const fs::path target = dir / name;
    const fs::path tmp = dir / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw LoadError("cannot write " + tmp.string());
      out << doc.dump(2) << '\n';
      if (!out) throw LoadError("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
  }
}

PatternLibrary compile_assets(const AssetBundle& assets, bool paper_faithful) {
  for (const auto& [name, doc] : assets) {
    if (std::find(kAssetFiles.begin(), kAssetFiles.end(), name) == kAssetFiles.end()) {
      throw CompileError("", name, "unknown asset file");
    }
  }
  json merged{{"lexicons", json::object()}, {"rules", json::array()}};
  for (auto name_view : kAssetFiles) {
    const std::string name(name_view);
    auto it = assets.find(name);
    if (it == assets.end()) throw CompileError("", name, "asset file missing");
    const json& doc = it->second;
    if (!doc.is_object()) throw CompileError("", name, "pattern document must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "lexicons") {
        if (!value.is_object()) throw CompileError("", name + ":lexicons", "expected an object");
        for (const auto& [lex, entries] : value.items()) {
          if (merged["lexicons"].contains(lex)) {
            throw CompileError("", "lexicons", "lexicon '" + lex + "' defined twice");
          }
          merged["lexicons"][lex] = entries;
        }
      } else if (key == "rules") {
        if (!value.is_array()) throw CompileError("", name + ":rules", "expected an array");
        for (const auto& r : value) {
          if (paper_faithful && r.is_object() && r.contains("id") && r["id"].is_string() &&
              r["id"].get<std::string>().rfind(kExtensionPrefix, 0) == 0) {
            continue;
          }
          merged["rules"].push_back(r);
        }
      } else {
        throw CompileError("", name + ":" + key, "unknown field");
      }
    }
  }
  return compile_json(merged);
}

PatternLibrary load_library(const fs::path& dir, bool paper_faithful) {
  return compile_assets(read_assets(dir), paper_faithful);
}

PatternLibrary load_default_library(bool paper_faithful) {
  return load_library(default_patterns_dir(), paper_faithful);
}

bool is_extension_rule(const PatternRule& rule) {
  return rule.id.rfind(kExtensionPrefix, 0) == 0;
}

CarryoverLexicon carryover_lexicon(const PatternLibrary& lib) {
  auto d = CarryoverLexicon::defaults();
  return {lexicon_or(lib, "first_person", d.first_person),
          lexicon_or(lib, "former_study_markers", d.former_markers)};
}

std::string_view to_string(Severity s) { return s == Severity::kError ? "ERROR" : "WARNING"; }

std::string_view to_string(LintKind k) {
  switch (k) {
    case LintKind::kDuplicate: return "DUPLICATE";
    case LintKind::kShadowed: return "SHADOWED";
    case LintKind::kUnreachable: return "UNREACHABLE";
    case LintKind::kDegenerate: return "DEGENERATE";
  }
  return "UNREACHABLE";
}

const std::vector<Sentence>& degenerate_sentences() {
  static const std::vector<Sentence> sentences = [] {
    std::vector<Sentence> out;
    int n = 0;
    for (const char* text : {"", ".", ",", "the", "a", "x", "and", "-", "1"}) {
      out.push_back(make_naive_sentence("degenerate-" + std::to_string(n++), text));
    }
    return out;
  }();
  return sentences;
}

std::vector<LintFinding> lint(const PatternLibrary& lib) {
  std::vector<LintFinding> out;
  const auto& rules = lib.rules();
  const auto& lex = lib.lexicons();

  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (rules[i].same_effect(rules[j])) {
        out.push_back({Severity::kError, LintKind::kDuplicate, rules[i].id,
                       "same constraints as rule '" + rules[j].id + "'"});
        break;
      }
    }
  }

  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = 0; j < rules.size(); ++j) {
      if (i == j || rules[i].same_effect(rules[j])) continue;
      if (rule_covers(rules[j], rules[i], lex) && !rule_covers(rules[i], rules[j], lex)) {
        out.push_back({Severity::kWarning, LintKind::kShadowed, rules[i].id,
                       "every match is also produced by the more general rule '" +
                           rules[j].id + "'"});
        break;
      }
    }
  }

  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    if (std::none_of(r.matchers.begin(), r.matchers.end(), required)) {
      out.push_back({Severity::kError, LintKind::kDegenerate, r.id,
                     "every matcher is optional; the rule can match an empty sequence"});
      continue;
    }
    for (const auto& s : degenerate_sentences()) {
      if (!match_rule(s, lib, i).empty()) {
        out.push_back({Severity::kError, LintKind::kDegenerate, r.id,
                       "matches the degenerate sentence \"" + s.raw_text + "\""});
        break;
      }
    }
    for (std::size_t k = 0; k < r.matchers.size(); ++k) {
      auto ps = phrase_set(r.matchers[k], lex);
      if (ps && ps->empty() && required(r.matchers[k])) {
        out.push_back({Severity::kWarning, LintKind::kUnreachable, r.id,
                       "matchers[" + std::to_string(k) +
                           "]: lemma_in and lexicon_ref share no entry; the rule never matches"});
        break;
      }
    }
  }

  std::map<std::string, std::set<std::string>> reachable;
  for (const auto& r : rules) {
    for (const auto& m : r.matchers) {
      if (!m.lexicon_ref) continue;
      auto ps = phrase_set(m, lex);
      reachable[*m.lexicon_ref].insert(ps->begin(), ps->end());
    }
  }
  for (const auto& [name, entries] : lex) {
    const auto& seen = reachable[name];
    for (const auto& e : entries) {
      if (seen.count(e) == 0) {
        out.push_back({Severity::kWarning, LintKind::kUnreachable, "lexicon:" + name,
                       "entry '" + e + "' is not reachable from any rule"});
      }
    }
  }
  return out;
}

bool has_errors(const std::vector<LintFinding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const LintFinding& f) { return f.severity == Severity::kError; });
}

json findings_to_json(const std::vector<LintFinding>& findings) {
  json out = json::array();
  for (const auto& f : findings) {
    out.push_back({{"severity", to_string(f.severity)},
                   {"kind", to_string(f.kind)},
                   {"rule_id", f.rule_id},
                   {"message", f.message}});
  }
  return out;
}

GroupCounts coverage_report(const PatternLibrary& lib, const std::vector<Document>& corpus) {
  GroupCounts counts{};
  for (const auto& doc : corpus) {
    for (const auto& s : doc.sentences) {
      std::array<bool, kGroupCount> hit{};
      for (const auto& m : match_sentence(s, lib)) hit[static_cast<std::size_t>(m.group)] = true;
      for (std::size_t g = 0; g < kGroupCount; ++g) counts[g] += hit[g] ? 1 : 0;
    }
  }
  return counts;
}

std::vector<Exemplar> load_exemplars(const fs::path& file) {
  json doc;
  try {
    doc = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw LoadError(file.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("exemplars") || !doc["exemplars"].is_array()) {
    throw LoadError(file.string() + ": expected an object with an \"exemplars\" array");
  }
  std::vector<Exemplar> out;
  for (const auto& e : doc["exemplars"]) {
    auto group = group_from_name(e.value("group", ""));
    if (!group) throw LoadError(file.string() + ": unknown group in " + e.dump());
    for (const auto& cue : e.at("cues")) {
      out.push_back({*group, e.at("sentence").get<std::string>(), cue.get<std::string>()});
    }
  }
  return out;
}

std::vector<ExemplarResult> run_exemplars(const PatternLibrary& lib,
                                          const std::vector<Exemplar>& exemplars) {
  std::vector<ExemplarResult> out;
  for (const auto& ex : exemplars) {
    ExemplarResult res{ex, false, {}};
    Sentence s = preprocess_sentence(make_naive_sentence("exemplar", ex.sentence));
    Sentence cue = make_naive_sentence("cue", ex.cue);
    const std::size_t len = cue.tokens.size();
    auto spans = match_sentence(s, lib, GroupSet{ex.group});
    for (std::size_t start = 0; start + len <= s.tokens.size() && !res.matched && len > 0;
         ++start) {
      bool equal = true;
      for (std::size_t k = 0; k < len && equal; ++k) {
        equal = to_lower(s.tokens[start + k].text) == to_lower(cue.tokens[k].text);
      }
      if (!equal) continue;
      for (const auto& m : spans) {
        if (m.start_token <= start && m.end_token >= start + len &&
            m.length() <= len + kExemplarContextTokens) {
          res.matched = true;
          res.span = m.matched_text;
          break;
        }
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace unscientify
