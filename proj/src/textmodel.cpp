#include "unscientify/textmodel.hpp"

#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <set>
#include <sstream>

#include "unscientify/error.hpp"

namespace unscientify {

namespace {

constexpr std::array<std::string_view, kUposCount> kUposNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

// Lowercased forms that end with "." but do not end a sentence.
const std::set<std::string, std::less<>> kAbbreviations = {
    "al.",   "e.g.",  "i.e.",  "fig.",  "figs.", "eq.",    "eqs.",  "ref.",
    "refs.", "vs.",   "cf.",   "etc.",  "approx.", "resp.", "dr.",  "prof.",
    "no.",   "nos.",  "vol.",  "pp.",   "p.",    "ch.",    "sect.", "tab.",
    "ca.",   "st.",   "mr.",   "mrs.",  "ms.",   "jr.",    "sr.",   "viz."};

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ascii_alnum(unsigned char c) { return std::isalnum(c) != 0; }
// Any non-ASCII byte is treated as part of a word so UTF-8 letters stay whole.
bool is_word_byte(unsigned char c) { return c >= 0x80 || is_ascii_alnum(c); }

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct PendingToken {
  AnnotatedToken token;
  std::optional<std::size_t> head_id;  // 1-based CoNLL-U head, 0 = root
  std::size_t line = 0;
};

void finish_sentence(Document& doc, std::vector<PendingToken>& pending,
                     std::optional<std::string>& text_comment,
                     std::optional<std::string>& id_comment,
                     std::set<std::string>& seen_ids) {
  if (pending.empty()) {
    text_comment.reset();
    id_comment.reset();
    return;
  }
  Sentence s;
  s.id = id_comment ? *id_comment : "s" + std::to_string(doc.sentences.size() + 1);
  if (!seen_ids.insert(s.id).second) {
    throw ValidationError("duplicate sentence id '" + s.id + "'");
  }
  const std::size_t n = pending.size();
  for (auto& p : pending) {
    if (p.head_id && *p.head_id > 0) {
      if (*p.head_id > n) {
        throw ValidationError("sentence '" + s.id + "': head " +
                              std::to_string(*p.head_id) + " out of range at line " +
                              std::to_string(p.line));
      }
      std::size_t head = *p.head_id - 1;
      if (head == p.token.index) {
        throw ValidationError("sentence '" + s.id + "': token " +
                              std::to_string(p.token.index + 1) + " is its own head");
      }
      p.token.head = head;
    }
  }
  std::vector<std::string> forms;
  forms.reserve(n);
  for (const auto& p : pending) forms.push_back(p.token.text);

  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> offsets;
  if (text_comment) {
    s.raw_text = *text_comment;
    offsets = align_forms(s.raw_text, forms);
  }
  if (!offsets) {
    s.raw_text.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s.raw_text += ' ';
      s.raw_text += forms[i];
    }
    offsets = align_forms(s.raw_text, forms);
  }
  for (std::size_t i = 0; i < n; ++i) {
    pending[i].token.char_start = (*offsets)[i].first;
    pending[i].token.char_end = (*offsets)[i].second;
    s.tokens.push_back(std::move(pending[i].token));
  }
  doc.sentences.push_back(std::move(s));
  pending.clear();
  text_comment.reset();
  id_comment.reset();
}

}  // namespace

std::optional<Upos> upos_from_string(std::string_view tag) {
  for (std::size_t i = 0; i < kUposNames.size(); ++i) {
    if (kUposNames[i] == tag) return static_cast<Upos>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Upos upos) {
  auto i = static_cast<std::size_t>(upos);
  return i < kUposNames.size() ? kUposNames[i] : std::string_view("UNKNOWN");
}

std::string to_lower(std::string_view s) {
  bool ascii = std::all_of(s.begin(), s.end(),
                           [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (ascii) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower();
  std::string out;
  u.toUTF8String(out);
  return out;
}

bool AnnotatedToken::has_feature(const MorphFeature& f) const {
  return std::binary_search(morph.begin(), morph.end(), f);
}

std::string_view Sentence::slice(std::size_t start, std::size_t end) const {
  if (start >= end || end > tokens.size()) return {};
  std::size_t b = tokens[start].char_start;
  std::size_t e = tokens[end - 1].char_end;
  return std::string_view(raw_text).substr(b, e - b);
}

bool Sentence::annotated() const {
  return std::any_of(tokens.begin(), tokens.end(),
                     [](const AnnotatedToken& t) { return t.upos != Upos::kUnknown; });
}

std::optional<std::vector<std::pair<std::size_t, std::size_t>>> align_forms(
    std::string_view text, const std::vector<std::string>& forms) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(forms.size());
  std::size_t cursor = 0;
  for (const auto& form : forms) {
    if (form.empty()) return std::nullopt;
    auto pos = text.find(form, cursor);
    if (pos == std::string_view::npos) return std::nullopt;
    out.emplace_back(pos, pos + form.size());
    cursor = pos + form.size();
  }
  return out;
}

Document parse_conllu(std::istream& in, std::string doc_id) {
  Document doc;
  doc.id = std::move(doc_id);
  std::vector<PendingToken> pending;
  std::optional<std::string> text_comment;
  std::optional<std::string> id_comment;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      finish_sentence(doc, pending, text_comment, id_comment, seen_ids);
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = trim(std::string_view(line).substr(1, eq - 1));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key == "text") text_comment = value;
        if (key == "sent_id") id_comment = value;
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    const std::string& id = fields[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    auto index = parse_index(id);
    if (!index || *index != pending.size() + 1) {
      throw ParseError(line_no, "token id '" + id + "' is not the next index");
    }
    PendingToken p;
    p.line = line_no;
    p.token.index = pending.size();
    p.token.text = fields[1];
    if (p.token.text.empty()) throw ParseError(line_no, "empty FORM");
    p.token.lemma = to_lower(fields[2] == "_" && fields[1] != "_" ? fields[1] : fields[2]);
    if (fields[3] != "_") {
      auto upos = upos_from_string(fields[3]);
      if (!upos) throw ParseError(line_no, "unknown UPOS '" + fields[3] + "'");
      p.token.upos = *upos;
    }
    if (fields[5] != "_" && !fields[5].empty()) {
      std::stringstream feats(fields[5]);
      std::string feat;
      while (std::getline(feats, feat, '|')) {
        auto eq = feat.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "bad feature '" + feat + "'");
        p.token.morph.emplace_back(feat.substr(0, eq), feat.substr(eq + 1));
      }
      std::sort(p.token.morph.begin(), p.token.morph.end());
    }
    if (fields[6] != "_") {
      auto head = parse_index(fields[6]);
      if (!head) throw ParseError(line_no, "bad HEAD '" + fields[6] + "'");
      p.head_id = *head;
    }
    if (fields[7] != "_") p.token.dep = fields[7];
    pending.push_back(std::move(p));
  }
  finish_sentence(doc, pending, text_comment, id_comment, seen_ids);
  return doc;
}

Document parse_conllu_string(std::string_view text, std::string doc_id) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in, std::move(doc_id));
}

std::string write_conllu(const Document& doc) {
  std::string out;
  for (const auto& s : doc.sentences) {
    out += "# sent_id = " + s.id + "\n";
    out += "# text = " + s.raw_text + "\n";
    for (const auto& t : s.tokens) {
      std::string feats;
      for (const auto& [k, v] : t.morph) {
        if (!feats.empty()) feats += '|';
        feats += k + "=" + v;
      }
      out += std::to_string(t.index + 1) + '\t' + t.text + '\t' + t.lemma + '\t' +
             (t.upos == Upos::kUnknown ? std::string("_") : std::string(to_string(t.upos))) +
             "\t_\t" + (feats.empty() ? "_" : feats) + '\t' +
             (t.head ? std::to_string(*t.head + 1) : (t.dep.empty() ? "_" : "0")) + '\t' +
             (t.dep.empty() ? "_" : t.dep) + "\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // Swallow runs like "?!" or "...".
    std::size_t end = i + 1;
    while (end < n && (text[end] == '.' || text[end] == '!' || text[end] == '?')) ++end;
    bool boundary = false;
    if (end == n) {
      boundary = true;
    } else if (is_space(static_cast<unsigned char>(text[end]))) {
      std::size_t k = end;
      while (k < n && is_space(static_cast<unsigned char>(text[k]))) ++k;
      boundary = k == n || std::isupper(static_cast<unsigned char>(text[k])) != 0;
    }
    if (boundary && c == '.' && end == i + 1) {
      // Abbreviation guard: the whitespace-delimited word ending here.
      std::size_t w = i;
      while (w > start && !is_space(static_cast<unsigned char>(text[w - 1]))) --w;
      std::string word = to_lower(text.substr(w, i + 1 - w));
      while (!word.empty() && (word.front() == '(' || word.front() == '[' || word.front() == '"')) {
        word.erase(word.begin());
      }
      if (kAbbreviations.count(word) != 0) boundary = false;
    }
    if (!boundary) {
      i = end - 1;
      continue;
    }
    std::string sentence = trim(text.substr(start, end - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = end;
    i = end - 1;
  }
  std::string tail = trim(text.substr(std::min(start, n)));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> tokenize_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_word_byte(c) || (c == '@' && i + 1 < n && is_word_byte(static_cast<unsigned char>(text[i + 1])))) {
      ++i;
      for (;;) {
        while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        // Keep decimals ("0.05") and intra-word hyphens ("meta-analyses") whole.
        if (i + 1 < n && text[i] == '.' &&
            std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
          ++i;
          continue;
        }
        if (i + 1 < n && text[i] == '-' && is_word_byte(static_cast<unsigned char>(text[i - 1])) &&
            is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
          ++i;
          continue;
        }
        break;
      }
    } else if (c == '\'' && !out.empty() && out.back().second == i && i + 1 < n &&
               std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
      // Clitic after a word: "Briscoe's" -> "Briscoe" "'s".
      ++i;
      while (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++i;
    }
    out.emplace_back(start, i);
  }
  return out;
}

Sentence make_naive_sentence(std::string id, std::string text) {
  Sentence s;
  s.id = std::move(id);
  s.raw_text = std::move(text);
  auto spans = tokenize_spans(s.raw_text);
  s.tokens.reserve(spans.size());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    AnnotatedToken t;
    t.index = k;
    t.char_start = spans[k].first;
    t.char_end = spans[k].second;
    t.text = s.raw_text.substr(t.char_start, t.char_end - t.char_start);
    t.lemma = to_lower(t.text);
    s.tokens.push_back(std::move(t));
  }
  return s;
}

Document naive_tokenize(std::string_view text, std::string doc_id) {
  Document doc;
  doc.id = std::move(doc_id);
  auto sentences = split_sentences(text);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    doc.sentences.push_back(make_naive_sentence("s" + std::to_string(i + 1), std::move(sentences[i])));
  }
  return doc;
}

std::vector<std::string> validate(const Sentence& s) {
  std::vector<std::string> problems;
  auto fail = [&](std::size_t i, const std::string& what) {
    problems.push_back("sentence '" + s.id + "' token " + std::to_string(i) + ": " + what);
  };
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& t = s.tokens[i];
    if (t.index != i) fail(i, "index not contiguous");
    if (!(t.char_start < t.char_end && t.char_end <= s.raw_text.size())) {
      fail(i, "character range out of bounds");
      continue;
    }
    if (i > 0 && t.char_start < prev_end) fail(i, "overlaps previous token");
    prev_end = t.char_end;
    if (s.raw_text.compare(t.char_start, t.char_end - t.char_start, t.text) != 0) {
      fail(i, "text does not match raw_text slice");
    }
    if (t.head && (*t.head >= s.tokens.size() || *t.head == i)) fail(i, "invalid head");
  }
  return problems;
}

std::vector<std::string> validate(const Document& doc) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto& s : doc.sentences) {
    if (!ids.insert(s.id).second) problems.push_back("duplicate sentence id '" + s.id + "'");
    auto p = validate(s);
    problems.insert(problems.end(), p.begin(), p.end());
  }
  return problems;
}

}  // namespace unscientify
