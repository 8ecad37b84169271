#include "unscientify/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "unscientify/error.hpp"
#include "unscientify/hash.hpp"
#include "unscientify/knowledge.hpp"
#include "unscientify/preprocess.hpp"

namespace unscientify {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kNameMentionId = "former.name_mention";

bool is_year(std::string_view t) {
  if (t.size() != 4 && t.size() != 5) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  }
  if (t.size() == 5 && !std::islower(static_cast<unsigned char>(t[4]))) return false;
  int year = std::stoi(std::string(t.substr(0, 4)));
  return year >= 1500 && year <= 2099;
}

bool is_capitalized_word(const std::string& t) {
  if (t.empty()) return false;
  if (std::any_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return false;
  }
  auto c = static_cast<unsigned char>(t[0]);
  if (c < 0x80) return std::isupper(c) != 0;
  return to_lower(t) != t;
}

bool is_possessive(const std::string& t) { return t == "'s" || t == "’s" || t == "'"; }

bool is_particle(const std::string& lower) {
  static const std::array<std::string_view, 11> kParticles = {
      "van", "von", "de", "der", "den", "la", "le", "du", "da", "di", "del"};
  return std::find(kParticles.begin(), kParticles.end(), lower) != kParticles.end();
}

bool is_connector(const std::string& t) { return t == "and" || t == "&" || t == ","; }

bool is_function_word(const std::string& lower) {
  static const std::array<std::string_view, 40> kWords = {
      "the", "a", "an", "in", "as", "this", "that", "these", "those", "however", "moreover",
      "furthermore", "also", "although", "while", "since", "but", "and", "or", "for", "recently",
      "similarly", "according", "by", "from", "with", "following", "unlike", "like", "both",
      "our", "their", "previous", "here", "then", "thus", "when", "after", "before", "to"};
  return std::find(kWords.begin(), kWords.end(), lower) != kWords.end();
}

// Trigger starting at i: "et al(.)" or "( year )". Returns its end.
std::optional<std::size_t> trigger_at(const Sentence& s, std::size_t i) {
  const auto& t = s.tokens;
  const std::size_t n = t.size();
  if (i + 1 < n && to_lower(t[i].text) == "et" &&
      (to_lower(t[i + 1].text) == "al" || to_lower(t[i + 1].text) == "al.")) {
    std::size_t end = i + 2;
    if (end < n && t[end].text == "." && t[i + 1].text.back() != '.') ++end;
    return end;
  }
  if (i + 2 < n && t[i].text == "(" && is_year(t[i + 1].text) && t[i + 2].text == ")") {
    return i + 3;
  }
  return std::nullopt;
}

SpanMatch make_span(const Sentence& s, std::size_t start, std::size_t end, Group g,
                    std::string_view id) {
  return {s.id, start, end, g, std::string(id), std::string(s.slice(start, end))};
}

std::string quote_list(const std::vector<SpanMatch>& spans) {
  std::string out;
  for (const auto& m : spans) {
    if (!out.empty()) out += "; ";
    out += std::string(group_description(m.group)) + " expressed by '" + m.matched_text + "'";
  }
  return out;
}

ordered_json span_to_json(const SpanMatch& m) {
  ordered_json j;
  j["start"] = m.start_token;
  j["end"] = m.end_token;
  j["group"] = std::string(group_name(m.group));
  j["pattern_id"] = m.pattern_id;
  j["text"] = m.matched_text;
  return j;
}

SpanMatch span_from_json(const json& j, const std::string& sentence_id) {
  if (!j.is_object()) throw ValidationError("span must be an object");
  SpanMatch m;
  m.sentence_id = sentence_id;
  m.start_token = j.at("start").get<std::size_t>();
  m.end_token = j.at("end").get<std::size_t>();
  auto g = group_from_name(j.at("group").get<std::string>());
  if (!g) throw ValidationError("unknown group '" + j.at("group").get<std::string>() + "'");
  m.group = *g;
  m.pattern_id = j.at("pattern_id").get<std::string>();
  m.matched_text = j.at("text").get<std::string>();
  if (m.end_token <= m.start_token) throw ValidationError("empty span");
  return m;
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::kUncertainty ? "UNCERTAINTY" : "CLAIM";
}

std::string_view to_string(AuthorialRef ref) {
  switch (ref) {
    case AuthorialRef::kNone: return "NONE";
    case AuthorialRef::kAuthor: return "AUTHOR";
    case AuthorialRef::kFormerStudy: return "FORMER_STUDY";
    case AuthorialRef::kBoth: return "BOTH";
  }
  return "NONE";
}

std::string_view display_name(AuthorialRef ref) {
  switch (ref) {
    case AuthorialRef::kNone: return "None";
    case AuthorialRef::kAuthor: return "Author(s)";
    case AuthorialRef::kFormerStudy: return "Former Study(s)";
    case AuthorialRef::kBoth: return "Both";
  }
  return "None";
}

std::optional<Label> label_from_string(std::string_view s) {
  if (s == "CLAIM") return Label::kClaim;
  if (s == "UNCERTAINTY") return Label::kUncertainty;
  return std::nullopt;
}

std::optional<AuthorialRef> authorial_ref_from_string(std::string_view s) {
  for (auto r : {AuthorialRef::kNone, AuthorialRef::kAuthor, AuthorialRef::kFormerStudy,
                 AuthorialRef::kBoth}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::vector<SpanMatch> collect_su_spans(const Sentence& sentence, const PatternLibrary& lib) {
  auto spans = match_sentence(sentence, lib, GroupSet::su());
  std::vector<SpanMatch> kept;
  for (auto& m : spans) {
    bool covered = std::any_of(kept.begin(), kept.end(), [&](const SpanMatch& k) {
      return k.group == m.group && k.start_token <= m.start_token && k.end_token >= m.end_token;
    });
    if (!covered) kept.push_back(std::move(m));
  }
  return kept;
}

ComplexCheck check_complex(const Sentence& sentence, const std::vector<SpanMatch>& su_spans,
                           const PatternLibrary& lib) {
  ComplexCheck out;
  if (su_spans.empty()) return out;
  auto cancels = match_sentence(sentence, lib, GroupSet::cancellation());
  if (cancels.empty()) {
    out.surviving = su_spans;
    return out;
  }
  for (const auto& s : su_spans) out.canceled.push_back({s, cancels.front()});
  return out;
}

std::vector<SpanMatch> detect_name_mentions(const Sentence& sentence) {
  std::vector<SpanMatch> out;
  const auto& t = sentence.tokens;
  std::size_t i = 0;
  while (i < t.size()) {
    auto end = trigger_at(sentence, i);
    if (!end) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (j > 0 && is_possessive(t[j - 1].text)) --j;
    std::size_t k = j;
    std::size_t start = j;
    while (k > 0) {
      const std::string& w = t[k - 1].text;
      const std::string lower = to_lower(w);
      if (is_capitalized_word(w)) {
        start = k - 1;
      } else if (!(is_particle(lower) || is_connector(w))) {
        break;
      }
      --k;
    }
    while (start < j && (is_function_word(to_lower(t[start].text)) || is_connector(t[start].text) ||
                         is_particle(to_lower(t[start].text)))) {
      ++start;
    }
    if (start < j && is_capitalized_word(t[start].text)) {
      out.push_back(make_span(sentence, start, *end, Group::kFormerRef, kNameMentionId));
    }
    i = *end;
  }
  return out;
}

AuthorialEvidence collect_authorial_evidence(const Sentence& sentence, const PatternLibrary& lib) {
  AuthorialEvidence ev;
  ev.self = match_sentence(sentence, lib, GroupSet{Group::kSelfRef});
  ev.former = match_sentence(sentence, lib, GroupSet{Group::kFormerRef});
  for (auto& m : detect_name_mentions(sentence)) ev.former.push_back(std::move(m));
  std::sort(ev.former.begin(), ev.former.end(), span_order);
  return ev;
}

AuthorialRef resolve_authorial_ref(const Sentence& sentence, const std::vector<SpanMatch>&,
                                   const PatternLibrary& lib) {
  auto ev = collect_authorial_evidence(sentence, lib);
  bool self = !ev.self.empty();
  bool former = !ev.former.empty();
  if (!self && !former) {
    self = has_flag(sentence.carryover_flags, Carryover::kSelfRef);
    former = has_flag(sentence.carryover_flags, Carryover::kFormerRef);
  }
  if (self && former) return AuthorialRef::kBoth;
  if (former) return AuthorialRef::kFormerStudy;
  return AuthorialRef::kAuthor;
}

std::string build_explanation(const Verdict& v) {
  if (v.label == Label::kUncertainty) {
    return quote_list(v.su_spans) + "; Authorial reference: " +
           std::string(display_name(v.authorial_ref));
  }
  if (v.canceled.empty()) return "No scientific uncertainty pattern matched.";
  std::string out;
  for (const auto& p : v.canceled) {
    if (!out.empty()) out += "; ";
    out += "Uncertainty cue '" + p.cue.matched_text + "' canceled by " +
           std::string(group_description(p.cancellation.group)) + " statement '" +
           p.cancellation.matched_text + "'";
  }
  return out;
}

Verdict annotate_sentence(const Sentence& sentence, const PatternLibrary& lib) {
  Verdict v;
  v.sentence_id = sentence.id;
  v.library_version = lib.version();
  v.text_checksum = fnv1a64_hex(sentence.raw_text);
  auto su = collect_su_spans(sentence, lib);
  if (!su.empty()) {
    auto cc = check_complex(sentence, su, lib);
    v.su_spans = std::move(cc.surviving);
    v.canceled = std::move(cc.canceled);
  }
  if (!v.su_spans.empty()) {
    v.label = Label::kUncertainty;
    v.authorial_ref = resolve_authorial_ref(sentence, v.su_spans, lib);
  }
  v.explanation = build_explanation(v);
  return v;
}

std::vector<Verdict> annotate_document(const Document& doc, const PatternLibrary& lib) {
  std::vector<Verdict> out;
  out.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) out.push_back(annotate_sentence(s, lib));
  return out;
}

Document prepare_document(const Document& doc, const PatternLibrary& lib) {
  return preprocess_document(doc, carryover_lexicon(lib));
}

std::vector<Verdict> annotate_text(std::string_view text, const PatternLibrary& lib) {
  return annotate_document(prepare_document(naive_tokenize(text), lib), lib);
}

std::vector<std::string> check_invariants(const Verdict& v) {
  std::vector<std::string> problems;
  if ((v.label == Label::kUncertainty) != !v.su_spans.empty()) {
    problems.push_back("label/span coupling violated");
  }
  if (v.label == Label::kClaim && v.authorial_ref != AuthorialRef::kNone) {
    problems.push_back("CLAIM verdict carries an authorial reference");
  }
  if (v.label == Label::kUncertainty && v.authorial_ref == AuthorialRef::kNone) {
    problems.push_back("UNCERTAINTY verdict without authorial reference");
  }
  for (const auto& p : v.canceled) {
    if (!is_cancellation_group(p.cancellation.group)) {
      problems.push_back("canceled pair names a non-cancellation span");
    }
  }
  for (const auto& m : v.su_spans) {
    if (!is_su_group(m.group)) problems.push_back("surviving span outside the uncertainty groups");
  }
  return problems;
}

ordered_json verdict_to_json(const Verdict& v) {
  ordered_json j;
  j["sentence_id"] = v.sentence_id;
  j["label"] = std::string(to_string(v.label));
  j["spans"] = ordered_json::array();
  for (const auto& m : v.su_spans) j["spans"].push_back(span_to_json(m));
  j["canceled"] = ordered_json::array();
  for (const auto& p : v.canceled) {
    ordered_json pj;
    pj["cue"] = span_to_json(p.cue);
    pj["cancellation"] = span_to_json(p.cancellation);
    j["canceled"].push_back(pj);
  }
  j["authorial_ref"] = std::string(to_string(v.authorial_ref));
  j["explanation"] = v.explanation;
  j["library_version"] = v.library_version;
  j["text_checksum"] = v.text_checksum;
  return j;
}

Verdict verdict_from_json(const json& j) {
  try {
    Verdict v;
    v.sentence_id = j.at("sentence_id").get<std::string>();
    auto label = label_from_string(j.at("label").get<std::string>());
    if (!label) throw ValidationError("unknown label");
    v.label = *label;
    for (const auto& s : j.at("spans")) v.su_spans.push_back(span_from_json(s, v.sentence_id));
    for (const auto& p : j.at("canceled")) {
      v.canceled.push_back(
          {span_from_json(p.at("cue"), v.sentence_id), span_from_json(p.at("cancellation"), v.sentence_id)});
    }
    auto ref = authorial_ref_from_string(j.at("authorial_ref").get<std::string>());
    if (!ref) throw ValidationError("unknown authorial_ref");
    v.authorial_ref = *ref;
    v.explanation = j.at("explanation").get<std::string>();
    v.library_version = j.at("library_version").get<std::string>();
    v.text_checksum = j.value("text_checksum", "");
    return v;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed verdict record: ") + e.what());
  }
}

std::string verdict_to_line(const Verdict& v) { return verdict_to_json(v).dump(); }

}  // namespace unscientify
