#include "regwatch/textcore.hpp"

#include <cctype>

#include "regwatch/errors.hpp"
#include "regwatch/textfile.hpp"

namespace regwatch::text {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

bool is_letter(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || u >= 0x80;
}

bool is_upper_or_digit(char c) {
  return (c >= 'A' && c <= 'Z') || is_digit(c);
}

bool is_utf8_boundary(std::string_view text, size_t pos) {
  if (pos == 0 || pos == text.size()) return true;
  return (static_cast<unsigned char>(text[pos]) & 0xC0) != 0x80;
}

// Consume a numeral starting at `i` (first char is a digit): digits with
// separator characters that are immediately followed by another digit.
// '-' and '/' keep dates ("2020-07-01", "1/2/2019") and section numbers
// single tokens.
bool is_number_separator(char c) {
  return c == ',' || c == '.' || c == '-' || c == '/';
}

size_t scan_number(std::string_view s, size_t i) {
  while (i < s.size()) {
    if (is_digit(s[i])) {
      ++i;
    } else if (is_number_separator(s[i]) && i + 1 < s.size() && is_digit(s[i + 1])) {
      ++i;
    } else {
      break;
    }
  }
  return i;
}

}  // namespace

bool Span::valid_in(std::string_view text) const {
  return start < end && end <= text.size() && is_utf8_boundary(text, start) &&
         is_utf8_boundary(text, end);
}

const char* to_string(Unit unit) {
  switch (unit) {
    case Unit::USD: return "usd";
    case Unit::PERCENT: return "percent";
    case Unit::COUNT: return "count";
  }
  return "count";
}

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::WORD: return "word";
    case TokenKind::NUMBER: return "number";
    case TokenKind::CURRENCY: return "currency";
    case TokenKind::PUNCT: return "punct";
  }
  return "word";
}

std::optional<Unit> unit_from_string(std::string_view name) {
  std::string n = to_lower(name);
  if (n == "usd") return Unit::USD;
  if (n == "percent") return Unit::PERCENT;
  if (n == "count") return Unit::COUNT;
  return std::nullopt;
}

AbbreviationSet AbbreviationSet::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

AbbreviationSet AbbreviationSet::from_lines(const std::vector<std::string>& lines) {
  AbbreviationSet out;
  for (const auto& line : lines) out.entries_.insert(line);
  return out;
}

bool AbbreviationSet::contains(std::string_view word) const {
  return entries_.find(word) != entries_.end();
}

ScaleLexicon ScaleLexicon::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

ScaleLexicon ScaleLexicon::from_lines(const std::vector<std::string>& lines) {
  ScaleLexicon out;
  for (const auto& line : lines) {
    std::vector<std::string> parts;
    for (const auto& p : split(line, ' ')) {
      if (!p.empty()) parts.push_back(p);
    }
    if (parts.size() != 2) {
      throw Error(ErrorCode::malformed_input, "scale lexicon entry: " + line);
    }
    out.pow10_by_word_[to_lower(parts[0])] = std::stoi(parts[1]);
  }
  return out;
}

std::optional<int> ScaleLexicon::pow10_of(std::string_view word) const {
  auto it = pow10_by_word_.find(to_lower(word));
  if (it == pow10_by_word_.end()) return std::nullopt;
  return it->second;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    Token tok;
    size_t start = i;
    if (is_letter(s[i])) {
      while (i < s.size() && is_letter(s[i])) ++i;
      tok.kind = TokenKind::WORD;
    } else if (is_digit(s[i])) {
      i = scan_number(s, i);
      tok.kind = TokenKind::NUMBER;
    } else if (s[i] == '$' && i + 1 < s.size() && is_digit(s[i + 1])) {
      i = scan_number(s, i + 1);
      tok.kind = TokenKind::CURRENCY;
    } else {
      ++i;
      tok.kind = TokenKind::PUNCT;
    }
    tok.span = Span{start, i};
    tok.surface = std::string(s.substr(start, i - start));
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<Sentence> segment_sentences(std::string_view text,
                                        const AbbreviationSet& abbreviations) {
  std::vector<Sentence> out;

  auto emit = [&](size_t begin, size_t end) {
    // Trim whitespace off both ends; skip all-whitespace stretches.
    while (begin < end && is_space(text[begin])) ++begin;
    while (end > begin && is_space(text[end - 1])) --end;
    if (begin >= end) return;
    Sentence s;
    s.span = Span{begin, end};
    s.index = out.size();
    s.tokens = tokenize(text.substr(begin, end - begin));
    for (Token& t : s.tokens) {
      t.span.start += begin;
      t.span.end += begin;
    }
    out.push_back(std::move(s));
  };

  size_t sentence_start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    size_t j = i + 1;
    if (j >= text.size() || !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j >= text.size() || !is_upper_or_digit(text[j])) continue;
    if (c == '.') {
      // Word ending at the period, e.g. "U.S." in "the U.S. Federal ...".
      size_t w = i + 1;
      while (w > sentence_start && !is_space(text[w - 1])) --w;
      if (abbreviations.contains(text.substr(w, i + 1 - w))) continue;
    }
    emit(sentence_start, i + 1);
    sentence_start = j;
    i = j - 1;
  }
  emit(sentence_start, text.size());
  return out;
}

QuantityScan normalize_quantities(const std::vector<Token>& tokens,
                                  const ScaleLexicon& scales) {
  QuantityScan out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    if (tok.kind != TokenKind::NUMBER && tok.kind != TokenKind::CURRENCY) continue;

    std::string_view numeral = tok.surface;
    if (tok.kind == TokenKind::CURRENCY) numeral.remove_prefix(1);  // '$'
    // Date-shaped tokens (2020-07-01, 1/2/2019) are not quantities.
    if (numeral.find('-') != std::string_view::npos ||
        numeral.find('/') != std::string_view::npos) {
      continue;
    }
    auto value = Decimal::parse(numeral);
    if (!value) {
      out.diagnostics.push_back("unparseable numeral: " + tok.surface);
      continue;
    }

    QuantityMention q;
    q.span = tok.span;
    q.unit = tok.kind == TokenKind::CURRENCY ? Unit::USD : Unit::COUNT;

    size_t next = i + 1;
    if (next < tokens.size() && tokens[next].kind == TokenKind::WORD) {
      if (auto pow = scales.pow10_of(tokens[next].surface)) {
        value = value->scaled_by_pow10(*pow);
        q.scale_word = to_lower(tokens[next].surface);
        q.span.end = tokens[next].span.end;
        ++next;
      }
    }
    if (next < tokens.size()) {
      const Token& u = tokens[next];
      bool percent_word = u.kind == TokenKind::WORD && to_lower(u.surface) == "percent";
      bool percent_sign = u.kind == TokenKind::PUNCT && u.surface == "%";
      if (percent_word || percent_sign) {
        q.unit = Unit::PERCENT;
        q.span.end = u.span.end;
      }
    }

    q.value = *value;
    out.mentions.push_back(std::move(q));
  }
  return out;
}

std::string normalize_whitespace(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace regwatch::text
