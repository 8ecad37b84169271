#include "unscientify/preprocess.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>

namespace unscientify {

namespace {

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

UChar32 first_code_point(std::string_view s) {
  if (s.empty()) return 0;
  int32_t i = 0;
  UChar32 c = 0;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  return c;
}

bool is_year(std::string_view s) {
  if (s.size() < 4 || s.size() > 5) return false;
  for (int i = 0; i < 4; ++i) {
    if (!is_digit(s[i])) return false;
  }
  int year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  if (year < 1500 || year > 2099) return false;
  return s.size() == 4 || (s[4] >= 'a' && s[4] <= 'z');
}

bool is_page_number(std::string_view s) {
  if (s.empty()) return false;
  std::size_t digits = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_digit(s[i])) {
      ++digits;
    } else if (s[i] == '-' && i > 0 && i + 1 < s.size()) {
      continue;
    } else if (s.compare(i, 3, "\xE2\x80\x93") == 0 && i > 0 && i + 3 < s.size()) {
      i += 2;
    } else {
      return false;
    }
  }
  return digits > 0;
}

const std::set<std::string, std::less<>> kParticles = {
    "van", "von", "de", "der", "den", "da", "di", "du", "la", "le", "del", "dos", "ter"};

// Capitalized words that commonly open a clause and are never author names.
const std::set<std::string, std::less<>> kNotNames = {
    "A", "According", "Additionally", "Also", "Although", "An", "And", "As",
    "Because", "Both", "But", "Consistent", "Contrary", "Conversely", "Earlier",
    "Finally", "First", "Following", "For", "Further", "Furthermore", "Hence",
    "Here", "However", "In", "Indeed", "Instead", "Interestingly", "It", "Later",
    "Like", "Likewise", "Many", "Moreover", "Most", "Nevertheless", "Nonetheless",
    "Notably", "Other", "Our", "Overall", "Previous", "Prior", "Recently",
    "Second", "See", "Several", "Similarly", "Since", "Some", "Specifically",
    "Still", "The", "Their", "Then", "Therefore", "These", "They", "This",
    "Thus", "Unlike", "We", "When", "While", "Yet"};

bool is_name_word(std::string_view w) {
  if (w.empty() || kNotNames.count(w) != 0) return false;
  UChar32 c = first_code_point(w);
  if (c <= 0 || !u_isupper(c)) return false;
  return std::none_of(w.begin(), w.end(), [](char ch) {
    return is_digit(ch) || ch == '(' || ch == ')' || ch == '[' || ch == ']' || ch == ';' ||
           ch == ',' || ch == '@';
  });
}

// Splits a parenthetical segment into words with ',', '&' and ':' as tokens.
std::vector<std::string> segment_tokens(std::string_view seg) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : seg) {
    if (is_ascii_space(c)) {
      flush();
    } else if (c == ',' || c == '&' || c == ':') {
      flush();
      out.emplace_back(1, c);
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

// Parses "<year>[, <year>]* [(,|:) [p.|pp.] <page>]" starting at position i.
bool parse_years_and_page(const std::vector<std::string>& t, std::size_t i) {
  if (i >= t.size() || !is_year(t[i])) return false;
  ++i;
  while (i + 1 < t.size() && t[i] == "," && is_year(t[i + 1])) i += 2;
  if (i == t.size()) return true;
  if (t[i] != "," && t[i] != ":") return false;
  ++i;
  if (i < t.size() && (t[i] == "p." || t[i] == "pp." || t[i] == "p" || t[i] == "pp")) ++i;
  if (i >= t.size() || !is_page_number(t[i])) return false;
  return i + 1 == t.size();
}

bool is_author_year_segment(std::string_view seg) {
  auto t = segment_tokens(seg);
  std::size_t i = 0;
  // Optional leading "see", "e.g.,", "cf." and similar.
  while (i < t.size()) {
    const auto& w = t[i];
    if (w == "see" || w == "See" || w == "also" || w == "e.g." || w == "eg." || w == "cf." ||
        w == "i.e." || w == "for" || w == "example") {
      ++i;
      if (i < t.size() && t[i] == ",") ++i;
      continue;
    }
    break;
  }
  auto name_at = [&](std::size_t k) -> std::size_t {
    std::size_t j = k;
    while (j < t.size() && kParticles.count(t[j]) != 0) ++j;
    if (j < t.size() && is_name_word(t[j])) return j + 1;
    return 0;
  };
  std::size_t next = name_at(i);
  if (next == 0) return false;
  i = next;
  for (;;) {
    if (i + 1 < t.size() && t[i] == "et" && (t[i + 1] == "al." || t[i + 1] == "al")) {
      i += 2;
      break;
    }
    if (i < t.size() && (next = name_at(i)) != 0) {
      i = next;
      continue;
    }
    if (i < t.size() && (t[i] == "," || t[i] == "&" || t[i] == "and")) {
      std::size_t j = i + 1;
      if (t[i] == "," && j < t.size() && (t[j] == "&" || t[j] == "and")) ++j;
      if ((next = name_at(j)) != 0) {
        i = next;
        continue;
      }
    }
    break;
  }
  if (i < t.size() && t[i] == ",") ++i;
  return parse_years_and_page(t, i);
}

bool is_bare_year_group(std::string_view content) {
  return parse_years_and_page(segment_tokens(content), 0);
}

struct Found {
  std::size_t begin;
  std::size_t end;
  CitationStyle style;
};

void find_numeric(std::string_view text, std::vector<Found>& out) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    std::size_t j = i + 1;
    while (j < text.size() && text[j] == ' ') ++j;
    if (j >= text.size() || !is_digit(text[j])) continue;
    bool ok = false;
    for (; j < text.size() && j - i < 80; ++j) {
      char c = text[j];
      if (c == ']') {
        ok = true;
        break;
      }
      if (is_digit(c) || c == ',' || c == '-' || c == ' ') continue;
      if (text.compare(j, 3, "\xE2\x80\x93") == 0) {
        j += 2;
        continue;
      }
      break;
    }
    if (ok) {
      out.push_back({i, j + 1, CitationStyle::kNumericBracket});
      i = j;
    }
  }
}

void find_parenthetical(std::string_view text, std::vector<Found>& out) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '(') continue;
    auto close = text.find_first_of("()", i + 1);
    if (close == std::string_view::npos || text[close] != ')') continue;
    std::string_view content = text.substr(i + 1, close - i - 1);
    bool all = !content.empty();
    std::size_t start = 0;
    while (all) {
      auto semi = content.find(';', start);
      auto seg = content.substr(start, semi == std::string_view::npos ? std::string_view::npos
                                                                       : semi - start);
      if (!is_author_year_segment(seg)) all = false;
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    if (all) {
      out.push_back({i, close + 1, CitationStyle::kParentheticalAuthorYear});
      i = close;
    }
  }
}

// Word ending at `end` (exclusive), delimited by whitespace or brackets.
std::pair<std::size_t, std::string_view> word_before(std::string_view text, std::size_t end) {
  while (end > 0 && is_ascii_space(text[end - 1])) --end;
  std::size_t b = end;
  while (b > 0) {
    char c = text[b - 1];
    if (is_ascii_space(c) || c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == ';')
      break;
    --b;
  }
  return {b, text.substr(b, end - b)};
}

void find_narrative(std::string_view text, std::vector<Found>& out) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '(') continue;
    auto close = text.find_first_of("()", i + 1);
    if (close == std::string_view::npos || text[close] != ')') continue;
    if (!is_bare_year_group(text.substr(i + 1, close - i - 1))) continue;
    // "immediately followed": only spaces between the names and "(".
    std::size_t pos = i;
    auto [b, w] = word_before(text, pos);
    if (w == "al." || w == "al") {
      auto [b2, w2] = word_before(text, b);
      if (w2 != "et") continue;
      std::tie(b, w) = word_before(text, b2);
    }
    if (!is_name_word(w)) continue;
    std::size_t begin = b;
    // Particles and further names joined by ",", "and", "&", or juxtaposition.
    for (;;) {
      auto [pb, pw] = word_before(text, begin);
      if (kParticles.count(pw) != 0 && pb < begin) {
        begin = pb;
        continue;
      }
      std::size_t k = begin;
      while (k > 0 && is_ascii_space(text[k - 1])) --k;
      std::size_t connector = k;
      if (k > 0 && text[k - 1] == ',') {
        connector = k - 1;
      } else if (pw == "and" || pw == "&") {
        connector = pb;
      } else {
        break;
      }
      auto [nb, nw] = word_before(text, connector);
      if (nb >= connector || !is_name_word(nw)) break;
      begin = nb;
    }
    out.push_back({begin, close + 1, CitationStyle::kNarrativeAuthorYear});
    i = close;
  }
}

std::string normalize_form(std::string_view form) {
  std::string out = normalize_text(form);
  return out.empty() ? std::string(form) : out;
}

}  // namespace

std::string_view to_string(CitationStyle style) {
  switch (style) {
    case CitationStyle::kNumericBracket: return "NUMERIC_BRACKET";
    case CitationStyle::kParentheticalAuthorYear: return "PARENTHETICAL_AUTHOR_YEAR";
    case CitationStyle::kNarrativeAuthorYear: return "NARRATIVE_AUTHOR_YEAR";
  }
  return "UNKNOWN";
}

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString composed = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");

  icu::UnicodeString cleaned;
  bool pending_space = false;
  for (int32_t i = 0; i < composed.length();) {
    UChar32 c = composed.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !cleaned.isEmpty();
      continue;
    }
    if (u_charType(c) == U_CONTROL_CHAR) continue;
    if (pending_space) cleaned.append(static_cast<UChar>(' '));
    pending_space = false;
    cleaned.append(c);
  }
  std::string out;
  cleaned.toUTF8String(out);
  return out;
}

StandardizedText standardize_citations(std::string_view text) {
  std::vector<Found> found;
  find_numeric(text, found);
  find_parenthetical(text, found);
  find_narrative(text, found);

  // Higher-priority recognizers claim characters first.
  std::vector<Found> chosen;
  for (const auto& f : found) {
    bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const Found& c) {
      return f.begin < c.end && c.begin < f.end;
    });
    if (!overlaps) chosen.push_back(f);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Found& a, const Found& b) { return a.begin < b.begin; });

  std::vector<Found> blocks;
  for (const auto& f : chosen) {
    if (!blocks.empty()) {
      auto gap = text.substr(blocks.back().end, f.begin - blocks.back().end);
      bool joinable = std::all_of(gap.begin(), gap.end(), [](char c) {
        return is_ascii_space(c) || c == ';' || c == ',';
      });
      if (joinable) {
        blocks.back().end = f.end;
        continue;
      }
    }
    blocks.push_back(f);
  }

  StandardizedText result;
  std::size_t cursor = 0;
  for (const auto& b : blocks) {
    result.text.append(text.substr(cursor, b.begin - cursor));
    result.text.append(kCitationToken);
    result.citations.push_back(
        {b.begin, b.end, b.style, std::string(text.substr(b.begin, b.end - b.begin))});
    cursor = b.end;
  }
  result.text.append(text.substr(cursor));
  return result;
}

CarryoverLexicon CarryoverLexicon::defaults() {
  return {{"i", "we", "our", "us", "my", "ours", "ourselves"},
          {"previous studies", "previous study", "prior studies", "prior work",
           "previous work", "previous research", "earlier studies", "former study",
           "the authors", "et al"}};
}

namespace {

bool starts_with_words(const Sentence& s, std::initializer_list<std::string_view> words) {
  if (s.tokens.size() < words.size()) return false;
  std::size_t i = 0;
  for (auto w : words) {
    if (s.tokens[i++].text != w) return false;
  }
  return true;
}

bool contains_phrase(const Sentence& s, std::string_view phrase) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= phrase.size()) {
    auto sp = phrase.find(' ', start);
    parts.push_back(phrase.substr(start, sp == std::string_view::npos ? std::string_view::npos
                                                                        : sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  if (parts.empty() || s.tokens.size() < parts.size()) return false;
  for (std::size_t i = 0; i + parts.size() <= s.tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < parts.size() && ok; ++k) {
      ok = s.tokens[i + k].lemma == parts[k] || to_lower(s.tokens[i + k].text) == parts[k];
    }
    if (ok) return true;
  }
  return false;
}

bool former_signal(const Sentence& s, const CarryoverLexicon& lex) {
  if (has_flag(s.carryover_flags, Carryover::kFormerRef)) return true;
  for (const auto& t : s.tokens) {
    if (t.text == kCitationToken) return true;
  }
  return std::any_of(lex.former_markers.begin(), lex.former_markers.end(),
                     [&](const std::string& p) { return contains_phrase(s, p); });
}

bool self_signal(const Sentence& s, const CarryoverLexicon& lex) {
  for (const auto& t : s.tokens) {
    auto lower = to_lower(t.text);
    if (std::find(lex.first_person.begin(), lex.first_person.end(), lower) !=
        lex.first_person.end()) {
      return true;
    }
  }
  return false;
}

bool opens_with_former_anaphor(const Sentence& s) {
  return starts_with_words(s, {"They"}) || starts_with_words(s, {"Their"}) ||
         starts_with_words(s, {"These", "authors"}) || starts_with_words(s, {"The", "authors"}) ||
         starts_with_words(s, {"This", "study"}) || starts_with_words(s, {"These", "studies"}) ||
         starts_with_words(s, {"Those", "studies"}) || starts_with_words(s, {"He"}) ||
         starts_with_words(s, {"She"});
}

bool opens_with_self_anaphor(const Sentence& s) {
  return starts_with_words(s, {"This"}) || starts_with_words(s, {"These", "results"}) ||
         starts_with_words(s, {"These", "findings"}) || starts_with_words(s, {"These", "data"});
}

}  // namespace

Document compute_carryover(const Document& doc, const CarryoverLexicon& lexicon) {
  Document out = doc;
  for (std::size_t i = 1; i < out.sentences.size(); ++i) {
    const Sentence& prev = out.sentences[i - 1];
    Sentence& cur = out.sentences[i];
    if (opens_with_former_anaphor(cur) && former_signal(prev, lexicon)) {
      cur.carryover_flags = cur.carryover_flags | Carryover::kFormerRef;
    }
    if (opens_with_self_anaphor(cur) && self_signal(prev, lexicon)) {
      cur.carryover_flags = cur.carryover_flags | Carryover::kSelfRef;
    }
  }
  return out;
}

Sentence preprocess_sentence(const Sentence& sentence) {
  std::string normalized = normalize_text(sentence.raw_text);
  if (!sentence.annotated()) {
    auto standardized = standardize_citations(normalized);
    Sentence out = make_naive_sentence(sentence.id, std::move(standardized.text));
    out.carryover_flags = sentence.carryover_flags;
    return out;
  }

  // Re-align annotated tokens against the normalized text.
  std::vector<AnnotatedToken> tokens = sentence.tokens;
  std::vector<std::string> forms;
  forms.reserve(tokens.size());
  for (auto& t : tokens) {
    t.text = normalize_form(t.text);
    forms.push_back(t.text);
  }
  auto offsets = align_forms(normalized, forms);
  if (!offsets) {
    normalized.clear();
    for (std::size_t i = 0; i < forms.size(); ++i) {
      if (i) normalized += ' ';
      normalized += forms[i];
    }
    offsets = align_forms(normalized, forms);
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tokens[i].char_start = (*offsets)[i].first;
    tokens[i].char_end = (*offsets)[i].second;
  }

  auto standardized = standardize_citations(normalized);
  const auto& cits = standardized.citations;

  // Which citation (if any) each old token falls into.
  std::vector<std::optional<std::size_t>> owner(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t c = 0; c < cits.size(); ++c) {
      if (tokens[i].char_start < cits[c].char_end && cits[c].char_start < tokens[i].char_end) {
        owner[i] = c;
        break;
      }
    }
  }

  // Output order: kept tokens and one token per citation, by position.
  struct Item {
    std::size_t pos;
    bool is_citation;
    std::size_t ref;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!owner[i]) items.push_back({tokens[i].char_start, false, i});
  }
  for (std::size_t c = 0; c < cits.size(); ++c) items.push_back({cits[c].char_start, true, c});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.pos < b.pos; });

  std::vector<std::size_t> new_index_of_token(tokens.size());
  std::vector<std::size_t> new_index_of_citation(cits.size());
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k].is_citation) {
      new_index_of_citation[items[k].ref] = k;
    } else {
      new_index_of_token[items[k].ref] = k;
    }
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (owner[i]) new_index_of_token[i] = new_index_of_citation[*owner[i]];
  }

  // Shift for a position in normalized text lying outside every citation.
  auto shift = [&](std::size_t pos) {
    std::ptrdiff_t delta = 0;
    for (const auto& c : cits) {
      if (c.char_end <= pos) {
        delta += static_cast<std::ptrdiff_t>(kCitationToken.size()) -
                 static_cast<std::ptrdiff_t>(c.char_end - c.char_start);
      }
    }
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) + delta);
  };

  Sentence out;
  out.id = sentence.id;
  out.raw_text = standardized.text;
  out.carryover_flags = sentence.carryover_flags;
  for (std::size_t k = 0; k < items.size(); ++k) {
    AnnotatedToken t;
    if (!items[k].is_citation) {
      t = tokens[items[k].ref];
      t.char_start = shift(t.char_start);
      t.char_end = shift(t.char_end);
      if (t.head) t.head = new_index_of_token[*t.head];
    } else {
      std::size_t c = items[k].ref;
      t.text = std::string(kCitationToken);
      t.lemma = to_lower(kCitationToken);
      t.upos = Upos::kPropn;
      t.char_start = shift(cits[c].char_start);
      t.char_end = t.char_start + kCitationToken.size();
      // Attach like the absorbed token whose head lies outside the citation.
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (owner[i] != c) continue;
        if (!tokens[i].head || owner[*tokens[i].head] != c) {
          t.dep = tokens[i].dep;
          t.head = tokens[i].head ? std::optional<std::size_t>(new_index_of_token[*tokens[i].head])
                                  : std::nullopt;
          break;
        }
      }
    }
    t.index = k;
    if (t.head && *t.head == k) t.head.reset();
    out.tokens.push_back(std::move(t));
  }
  return out;
}

Document preprocess_document(const Document& doc, const CarryoverLexicon& lexicon) {
  Document cleaned;
  cleaned.id = doc.id;
  cleaned.metadata = doc.metadata;
  cleaned.sentences.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) cleaned.sentences.push_back(preprocess_sentence(s));
  return compute_carryover(cleaned, lexicon);
}

}  // namespace unscientify
