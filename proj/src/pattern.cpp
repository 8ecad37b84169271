#include "unscientify/pattern.hpp"

#include <algorithm>
#include <cstdint>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "unscientify/error.hpp"
#include "unscientify/hash.hpp"

namespace unscientify {

using nlohmann::json;

namespace detail {

struct PhraseSet {
  std::unordered_set<std::string> singles;
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> multi;
};

struct CompiledMatcher {
  std::optional<std::string> exact;  // lowercased unless case_sensitive
  bool case_sensitive = false;
  std::shared_ptr<const std::regex> regex;
  std::optional<PhraseSet> phrases;
  bool has_upos_in = false;
  std::uint32_t upos_in = 0;
  std::uint32_t upos_not_in = 0;
  std::vector<MorphFeature> morph;
  std::optional<std::unordered_set<std::string>> dep;
  std::optional<std::unordered_set<std::string>> head_lemma;
  Quantifier quantifier = Quantifier::kOne;
};

struct CompiledRule {
  std::vector<CompiledMatcher> matchers;
};

struct CompiledLibrary {
  std::vector<PatternRule> rules;
  LexiconMap lexicons;
  std::string version;
  std::vector<CompiledRule> compiled;
};

}  // namespace detail

namespace {

using detail::CompiledMatcher;
using detail::CompiledRule;
using detail::PhraseSet;

std::uint32_t upos_bit(Upos u) { return 1u << static_cast<unsigned>(u); }

std::vector<std::string> split_words(const std::string& phrase) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < phrase.size()) {
    auto sp = phrase.find(' ', start);
    if (sp == std::string::npos) sp = phrase.size();
    if (sp > start) out.push_back(phrase.substr(start, sp - start));
    start = sp + 1;
  }
  return out;
}

bool token_ok(const CompiledMatcher& m, const Sentence& s, std::size_t i) {
  const AnnotatedToken& t = s.tokens[i];
  if (m.exact) {
    if (m.case_sensitive ? t.text != *m.exact : to_lower(t.text) != *m.exact) return false;
  }
  if (m.has_upos_in && (t.upos == Upos::kUnknown || (m.upos_in & upos_bit(t.upos)) == 0)) {
    return false;
  }
  if (m.upos_not_in != 0 && t.upos != Upos::kUnknown && (m.upos_not_in & upos_bit(t.upos)) != 0) {
    return false;
  }
  for (const auto& f : m.morph) {
    if (!t.has_feature(f)) return false;
  }
  if (m.dep && (t.dep.empty() || m.dep->count(t.dep) == 0)) return false;
  if (m.head_lemma) {
    if (!t.head || m.head_lemma->count(s.tokens[*t.head].lemma) == 0) return false;
  }
  if (m.regex && !std::regex_match(t.text, *m.regex)) return false;
  return true;
}

// Token counts one repetition of `m` can consume at position i.
void unit_lengths(const CompiledMatcher& m, const Sentence& s, std::size_t i,
                  std::vector<std::size_t>& out) {
  out.clear();
  const std::size_t n = s.tokens.size();
  if (i >= n) return;
  if (!m.phrases) {
    if (token_ok(m, s, i)) out.push_back(1);
    return;
  }
  const std::string& lemma = s.tokens[i].lemma;
  if (m.phrases->singles.count(lemma) != 0 && token_ok(m, s, i)) out.push_back(1);
  auto it = m.phrases->multi.find(lemma);
  if (it == m.phrases->multi.end()) return;
  for (const auto& words : it->second) {
    if (i + words.size() > n) continue;
    bool ok = true;
    for (std::size_t k = 0; k < words.size() && ok; ++k) {
      ok = s.tokens[i + k].lemma == words[k] && token_ok(m, s, i + k);
    }
    if (ok && std::find(out.begin(), out.end(), words.size()) == out.end()) {
      out.push_back(words.size());
    }
  }
}

// Longest end reachable from `start`, by forward propagation of the set of
// reachable positions through the matcher sequence.
std::optional<std::size_t> longest_match(const CompiledRule& rule, std::size_t max_span,
                                         const Sentence& s, std::size_t start) {
  const std::size_t n = s.tokens.size();
  const std::size_t limit = std::min(n, start + max_span);
  std::vector<char> cur(limit + 1, 0), next(limit + 1, 0);
  std::vector<std::size_t> work, lengths;
  cur[start] = 1;
  for (const auto& m : rule.matchers) {
    std::fill(next.begin(), next.end(), 0);
    const bool zero_ok = m.quantifier == Quantifier::kOpt || m.quantifier == Quantifier::kStar;
    const bool repeat = m.quantifier == Quantifier::kStar || m.quantifier == Quantifier::kPlus;
    work.clear();
    for (std::size_t p = start; p <= limit; ++p) {
      if (!cur[p]) continue;
      if (zero_ok) next[p] = 1;
      work.push_back(p);
    }
    std::vector<char> expanded(limit + 1, 0);
    while (!work.empty()) {
      std::size_t p = work.back();
      work.pop_back();
      unit_lengths(m, s, p, lengths);
      for (auto len : lengths) {
        std::size_t q = p + len;
        if (q > limit) continue;
        next[q] = 1;
        if (repeat && !expanded[q]) {
          expanded[q] = 1;
          work.push_back(q);
        }
      }
    }
    std::swap(cur, next);
  }
  for (std::size_t p = limit; p > start; --p) {
    if (cur[p]) return p;
  }
  return std::nullopt;
}

// ---- JSON parsing --------------------------------------------------------

const std::set<std::string> kMatcherKeys = {
    "text_exact", "case_sensitive", "text_regex", "lemma_in",     "lexicon_ref", "upos_in",
    "upos_not_in", "morph_all",     "dep_in",     "head_lemma_in", "quantifier"};
const std::set<std::string> kRuleKeys = {"id", "group", "matchers", "max_span_tokens", "note"};

std::vector<std::string> string_list(const json& v, const std::string& id,
                                     const std::string& field) {
  if (!v.is_array()) throw CompileError(id, field, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw CompileError(id, field, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<Upos> upos_list(const json& v, const std::string& id, const std::string& field) {
  std::vector<Upos> out;
  for (const auto& tag : string_list(v, id, field)) {
    auto u = upos_from_string(tag);
    if (!u) throw CompileError(id, field, "unknown UPOS '" + tag + "'");
    out.push_back(*u);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TokenMatcher parse_matcher(const json& j, const std::string& id) {
  if (!j.is_object()) throw CompileError(id, "matchers", "matcher must be an object");
  TokenMatcher m;
  for (const auto& [key, value] : j.items()) {
    if (kMatcherKeys.count(key) == 0) throw CompileError(id, key, "unknown field");
    if (key == "text_exact") {
      if (!value.is_string()) throw CompileError(id, key, "expected a string");
      m.text_exact = value.get<std::string>();
    } else if (key == "case_sensitive") {
      if (!value.is_boolean()) throw CompileError(id, key, "expected a boolean");
      m.case_sensitive = value.get<bool>();
    } else if (key == "text_regex") {
      if (!value.is_string()) throw CompileError(id, key, "expected a string");
      m.text_regex = value.get<std::string>();
    } else if (key == "lemma_in") {
      auto words = string_list(value, id, key);
      for (auto& w : words) w = to_lower(w);
      m.lemma_in = sorted_unique(std::move(words));
    } else if (key == "lexicon_ref") {
      if (!value.is_string()) throw CompileError(id, key, "expected a string");
      m.lexicon_ref = value.get<std::string>();
    } else if (key == "upos_in") {
      m.upos_in = upos_list(value, id, key);
    } else if (key == "upos_not_in") {
      m.upos_not_in = upos_list(value, id, key);
    } else if (key == "morph_all") {
      for (const auto& f : string_list(value, id, key)) {
        auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == f.size()) {
          throw CompileError(id, key, "feature '" + f + "' is not Key=Value");
        }
        m.morph_all.emplace_back(f.substr(0, eq), f.substr(eq + 1));
      }
      std::sort(m.morph_all.begin(), m.morph_all.end());
      m.morph_all.erase(std::unique(m.morph_all.begin(), m.morph_all.end()), m.morph_all.end());
    } else if (key == "dep_in") {
      m.dep_in = sorted_unique(string_list(value, id, key));
    } else if (key == "head_lemma_in") {
      auto words = string_list(value, id, key);
      for (auto& w : words) w = to_lower(w);
      m.head_lemma_in = sorted_unique(std::move(words));
    } else if (key == "quantifier") {
      if (!value.is_string()) throw CompileError(id, key, "expected one of 1 ? * +");
      auto q = quantifier_from_string(value.get<std::string>());
      if (!q) throw CompileError(id, key, "unknown quantifier '" + value.get<std::string>() + "'");
      m.quantifier = *q;
    }
  }
  return m;
}

PatternRule parse_rule(const json& j, std::size_t position) {
  std::string id = "#" + std::to_string(position);
  if (!j.is_object()) throw CompileError(id, "", "rule must be an object");
  if (j.contains("id")) {
    if (!j["id"].is_string() || j["id"].get<std::string>().empty()) {
      throw CompileError(id, "id", "expected a non-empty string");
    }
    id = j["id"].get<std::string>();
  } else {
    throw CompileError(id, "id", "missing");
  }
  PatternRule r;
  r.id = id;
  for (const auto& [key, value] : j.items()) {
    if (kRuleKeys.count(key) == 0) throw CompileError(id, key, "unknown field");
  }
  if (!j.contains("group") || !j["group"].is_string()) throw CompileError(id, "group", "missing");
  auto g = group_from_name(j["group"].get<std::string>());
  if (!g) throw CompileError(id, "group", "unknown group '" + j["group"].get<std::string>() + "'");
  r.group = *g;
  if (!j.contains("matchers") || !j["matchers"].is_array() || j["matchers"].empty()) {
    throw CompileError(id, "matchers", "must be a non-empty array");
  }
  for (const auto& mj : j["matchers"]) r.matchers.push_back(parse_matcher(mj, id));
  if (j.contains("max_span_tokens")) {
    const auto& v = j["max_span_tokens"];
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
      throw CompileError(id, "max_span_tokens", "expected a positive integer");
    }
    r.max_span_tokens = v.get<std::size_t>();
  }
  if (j.contains("note")) {
    if (!j["note"].is_string()) throw CompileError(id, "note", "expected a string");
    r.note = j["note"].get<std::string>();
  }
  return r;
}

PhraseSet make_phrase_set(const std::vector<std::string>& entries) {
  PhraseSet p;
  for (const auto& e : entries) {
    auto words = split_words(e);
    if (words.size() == 1) {
      p.singles.insert(words[0]);
    } else if (words.size() > 1) {
      p.multi[words[0]].push_back(std::move(words));
    }
  }
  // Sorted so lengths come out in a stable order.
  for (auto& [first, list] : p.multi) {
    std::sort(list.begin(), list.end());
  }
  return p;
}

CompiledRule compile_rule(const PatternRule& r, const LexiconMap& lexicons) {
  CompiledRule cr;
  std::size_t required = 0;
  for (std::size_t k = 0; k < r.matchers.size(); ++k) {
    const TokenMatcher& m = r.matchers[k];
    const std::string field = "matchers[" + std::to_string(k) + "]";
    if (!m.has_constraint() &&
        (m.quantifier == Quantifier::kOne || m.quantifier == Quantifier::kPlus)) {
      throw CompileError(r.id, field, "a matcher without constraints must use '?' or '*'");
    }
    if (m.quantifier == Quantifier::kOne || m.quantifier == Quantifier::kPlus) ++required;
    CompiledMatcher cm;
    cm.quantifier = m.quantifier;
    cm.case_sensitive = m.case_sensitive;
    if (m.text_exact) cm.exact = m.case_sensitive ? *m.text_exact : to_lower(*m.text_exact);
    if (m.text_regex) {
      try {
        cm.regex = std::make_shared<const std::regex>(*m.text_regex, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw CompileError(r.id, "text_regex", std::string("invalid regular expression: ") + e.what());
      }
    }
    std::optional<std::vector<std::string>> phrases;
    if (m.lexicon_ref) {
      auto it = lexicons.find(*m.lexicon_ref);
      if (it == lexicons.end()) {
        throw CompileError(r.id, "lexicon_ref", "unresolved lexicon '" + *m.lexicon_ref + "'");
      }
      phrases = it->second;
    }
    if (m.lemma_in) {
      if (phrases) {
        std::vector<std::string> both;
        std::set_intersection(phrases->begin(), phrases->end(), m.lemma_in->begin(),
                              m.lemma_in->end(), std::back_inserter(both));
        phrases = std::move(both);
      } else {
        phrases = *m.lemma_in;
      }
    }
    if (phrases) cm.phrases = make_phrase_set(*phrases);
    if (m.upos_in) {
      cm.has_upos_in = true;
      for (auto u : *m.upos_in) cm.upos_in |= upos_bit(u);
    }
    if (m.upos_not_in) {
      for (auto u : *m.upos_not_in) cm.upos_not_in |= upos_bit(u);
    }
    cm.morph = m.morph_all;
    if (m.dep_in) cm.dep.emplace(m.dep_in->begin(), m.dep_in->end());
    if (m.head_lemma_in) cm.head_lemma.emplace(m.head_lemma_in->begin(), m.head_lemma_in->end());
    cr.matchers.push_back(std::move(cm));
  }
  if (r.max_span_tokens < required) {
    throw CompileError(r.id, "max_span_tokens",
                       "smaller than the number of required matchers (" +
                           std::to_string(required) + ")");
  }
  return cr;
}

json lexicons_to_json(const LexiconMap& lexicons) {
  json out = json::object();
  for (const auto& [name, entries] : lexicons) out[name] = entries;
  return out;
}

}  // namespace

std::string_view to_string(Quantifier q) {
  switch (q) {
    case Quantifier::kOne: return "1";
    case Quantifier::kOpt: return "?";
    case Quantifier::kStar: return "*";
    case Quantifier::kPlus: return "+";
  }
  return "1";
}

std::optional<Quantifier> quantifier_from_string(std::string_view s) {
  if (s == "1") return Quantifier::kOne;
  if (s == "?") return Quantifier::kOpt;
  if (s == "*") return Quantifier::kStar;
  if (s == "+") return Quantifier::kPlus;
  return std::nullopt;
}

bool TokenMatcher::has_constraint() const {
  return text_exact || text_regex || lemma_in || lexicon_ref || upos_in || upos_not_in ||
         !morph_all.empty() || dep_in || head_lemma_in;
}

bool PatternRule::same_effect(const PatternRule& other) const {
  return group == other.group && matchers == other.matchers &&
         max_span_tokens == other.max_span_tokens;
}

bool span_order(const SpanMatch& a, const SpanMatch& b) {
  if (a.start_token != b.start_token) return a.start_token < b.start_token;
  if (a.length() != b.length()) return a.length() > b.length();
  if (a.group != b.group) return a.group < b.group;
  return a.pattern_id < b.pattern_id;
}

json rule_to_json(const PatternRule& r) {
  json j;
  j["id"] = r.id;
  j["group"] = std::string(group_name(r.group));
  j["max_span_tokens"] = r.max_span_tokens;
  if (!r.note.empty()) j["note"] = r.note;
  json ms = json::array();
  for (const auto& m : r.matchers) {
    json mj = json::object();
    if (m.text_exact) mj["text_exact"] = *m.text_exact;
    if (m.case_sensitive) mj["case_sensitive"] = true;
    if (m.text_regex) mj["text_regex"] = *m.text_regex;
    if (m.lemma_in) mj["lemma_in"] = *m.lemma_in;
    if (m.lexicon_ref) mj["lexicon_ref"] = *m.lexicon_ref;
    auto tags = [](const std::vector<Upos>& v) {
      json a = json::array();
      for (auto u : v) a.push_back(std::string(to_string(u)));
      return a;
    };
    if (m.upos_in) mj["upos_in"] = tags(*m.upos_in);
    if (m.upos_not_in) mj["upos_not_in"] = tags(*m.upos_not_in);
    if (!m.morph_all.empty()) {
      json a = json::array();
      for (const auto& [k, v] : m.morph_all) a.push_back(k + "=" + v);
      mj["morph_all"] = a;
    }
    if (m.dep_in) mj["dep_in"] = *m.dep_in;
    if (m.head_lemma_in) mj["head_lemma_in"] = *m.head_lemma_in;
    mj["quantifier"] = std::string(to_string(m.quantifier));
    ms.push_back(mj);
  }
  j["matchers"] = ms;
  return j;
}

PatternLibrary::PatternLibrary() {
  auto empty = std::make_shared<detail::CompiledLibrary>();
  json canonical{{"lexicons", json::object()}, {"rules", json::array()}};
  empty->version = fnv1a64_hex(canonical.dump());
  impl_ = std::move(empty);
}

const std::vector<PatternRule>& PatternLibrary::rules() const { return impl_->rules; }
const LexiconMap& PatternLibrary::lexicons() const { return impl_->lexicons; }
const std::string& PatternLibrary::version() const { return impl_->version; }

const PatternRule* PatternLibrary::find(std::string_view rule_id) const {
  for (const auto& r : impl_->rules) {
    if (r.id == rule_id) return &r;
  }
  return nullptr;
}

json PatternLibrary::to_json() const {
  json rules = json::array();
  for (const auto& r : impl_->rules) rules.push_back(rule_to_json(r));
  return json{{"lexicons", lexicons_to_json(impl_->lexicons)}, {"rules", rules}};
}

PatternLibrary compile(std::string_view pattern_source, const LexiconMap& lexicons) {
  json j;
  try {
    j = json::parse(pattern_source);
  } catch (const json::parse_error& e) {
    throw CompileError("", "", std::string("malformed pattern document: ") + e.what());
  }
  return compile_json(j, lexicons);
}

PatternLibrary compile_json(const json& source, const LexiconMap& external) {
  if (!source.is_object()) throw CompileError("", "", "pattern document must be an object");
  for (const auto& [key, value] : source.items()) {
    if (key != "lexicons" && key != "rules") throw CompileError("", key, "unknown field");
  }
  auto lib = std::make_shared<detail::CompiledLibrary>();
  for (const auto& [name, entries] : external) {
    lib->lexicons[name] = sorted_unique(entries);
  }
  if (source.contains("lexicons")) {
    const auto& lj = source["lexicons"];
    if (!lj.is_object()) throw CompileError("", "lexicons", "expected an object");
    for (const auto& [name, value] : lj.items()) {
      if (lib->lexicons.count(name) != 0) {
        throw CompileError("", "lexicons", "lexicon '" + name + "' defined twice");
      }
      auto entries = string_list(value, "", "lexicons." + name);
      std::set<std::string> seen;
      for (const auto& e : entries) {
        if (e.empty() || split_words(e).empty()) {
          throw CompileError("", "lexicons." + name, "empty entry");
        }
        if (to_lower(e) != e) {
          throw CompileError("", "lexicons." + name, "entry '" + e + "' is not lowercase");
        }
        if (!seen.insert(e).second) {
          throw CompileError("", "lexicons." + name, "duplicate entry '" + e + "'");
        }
      }
      lib->lexicons[name] = sorted_unique(std::move(entries));
    }
  }
  std::set<std::string> ids;
  if (source.contains("rules")) {
    const auto& rj = source["rules"];
    if (!rj.is_array()) throw CompileError("", "rules", "expected an array");
    std::size_t position = 0;
    for (const auto& r : rj) {
      PatternRule rule = parse_rule(r, position++);
      if (!ids.insert(rule.id).second) throw CompileError(rule.id, "id", "duplicate rule id");
      lib->compiled.push_back(compile_rule(rule, lib->lexicons));
      lib->rules.push_back(std::move(rule));
    }
  }
  json canonical_rules = json::array();
  for (const auto& r : lib->rules) canonical_rules.push_back(rule_to_json(r));
  json canonical{{"lexicons", lexicons_to_json(lib->lexicons)}, {"rules", canonical_rules}};
  lib->version = fnv1a64_hex(canonical.dump());

  PatternLibrary out;
  out.impl_ = std::move(lib);
  return out;
}

std::vector<SpanMatch> match_rule(const Sentence& sentence, const PatternLibrary& lib,
                                  std::size_t rule_index) {
  const auto& impl = lib.compiled();
  const PatternRule& rule = impl.rules[rule_index];
  const CompiledRule& cr = impl.compiled[rule_index];
  std::vector<SpanMatch> out;
  for (std::size_t start = 0; start < sentence.tokens.size(); ++start) {
    auto end = longest_match(cr, rule.max_span_tokens, sentence, start);
    if (!end) continue;
    out.push_back({sentence.id, start, *end, rule.group, rule.id,
                   std::string(sentence.slice(start, *end))});
  }
  return out;
}

std::vector<SpanMatch> match_sentence(const Sentence& sentence, const PatternLibrary& lib,
                                      const GroupSet& groups) {
  std::vector<SpanMatch> out;
  const auto& rules = lib.rules();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!groups.contains(rules[i].group)) continue;
    auto spans = match_rule(sentence, lib, i);
    out.insert(out.end(), std::make_move_iterator(spans.begin()),
               std::make_move_iterator(spans.end()));
  }
  std::sort(out.begin(), out.end(), span_order);
  return out;
}

PatternLibrary with_rules(const PatternLibrary& lib, const std::vector<PatternRule>& extra) {
  json source = lib.to_json();
  for (const auto& r : extra) source["rules"].push_back(rule_to_json(r));
  return compile_json(source);
}

}  // namespace unscientify
