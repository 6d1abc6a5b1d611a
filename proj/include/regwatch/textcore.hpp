#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "regwatch/decimal.hpp"

namespace regwatch::text {

// Byte offsets into the owning text, end exclusive. Both ends must fall on
// UTF-8 character boundaries.
struct Span {
  size_t start = 0;
  size_t end = 0;

  size_t length() const { return end - start; }
  bool valid_in(std::string_view text) const;
  bool overlaps(const Span& other) const {
    return start < other.end && other.start < end;
  }
  bool contains(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
  auto operator<=>(const Span&) const = default;
};

enum class TokenKind { WORD, NUMBER, CURRENCY, PUNCT };

struct Token {
  Span span;
  std::string surface;
  TokenKind kind = TokenKind::WORD;
};

struct Sentence {
  Span span;
  size_t index = 0;
  std::vector<Token> tokens;  // spans in the same coordinates as `span`
};

enum class Unit { USD, PERCENT, COUNT };

const char* to_string(Unit unit);
const char* to_string(TokenKind kind);
std::optional<Unit> unit_from_string(std::string_view name);

struct QuantityMention {
  Span span;
  Decimal value;  // already scaled: "3 billion" carries 3000000000
  Unit unit = Unit::COUNT;
  std::optional<std::string> scale_word;
};

// Abbreviations that suppress a sentence split after their trailing period
// ("U.S.", "Sec.", "No.", ...). Stored as written, matched byte-exact.
class AbbreviationSet {
 public:
  static AbbreviationSet load(const std::string& path);
  static AbbreviationSet from_lines(const std::vector<std::string>& lines);
  bool contains(std::string_view word) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::set<std::string, std::less<>> entries_;
};

// "million 6" style lines: scale word plus its power of ten.
class ScaleLexicon {
 public:
  static ScaleLexicon load(const std::string& path);
  static ScaleLexicon from_lines(const std::vector<std::string>& lines);
  std::optional<int> pow10_of(std::string_view word) const;

 private:
  std::map<std::string, int, std::less<>> pow10_by_word_;
};

// Splits after {., !, ?} followed by whitespace and an uppercase letter or
// digit, unless the word ending at the period is in the stoplist. Sentence
// spans exclude surrounding whitespace, so spans plus gaps reconstruct the
// input. Tokens are filled in, offset to input coordinates.
std::vector<Sentence> segment_sentences(std::string_view text,
                                        const AbbreviationSet& abbreviations);

// Maximal letter runs -> WORD; digit runs with digit-adjacent separators
// (',', '.', '-', '/') -> NUMBER, which keeps dates and section numbers
// whole; '$' fused onto a following number -> CURRENCY; anything else
// one-byte PUNCT. Bytes >= 0x80 count as letters so UTF-8 words stay whole.
std::vector<Token> tokenize(std::string_view sentence_text);

struct QuantityScan {
  std::vector<QuantityMention> mentions;
  std::vector<std::string> diagnostics;  // unparseable numerals, skipped
};

QuantityScan normalize_quantities(const std::vector<Token>& tokens,
                                  const ScaleLexicon& scales);

// Collapse every whitespace run to a single space and trim. Used for
// Article bodies and flattened XML text.
std::string normalize_whitespace(std::string_view raw);

}  // namespace regwatch::text
