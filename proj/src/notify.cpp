#include "regwatch/notify.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "regwatch/errors.hpp"
#include "regwatch/textcore.hpp"
#include "regwatch/textfile.hpp"

namespace regwatch::notify {

using nlohmann::json;

bool is_rule_field(std::string_view name) {
  static const std::set<std::string, std::less<>> kFields = {
      "authority", "regulated_entity", "threshold", "direction",
      "quantity.value", "quantity.unit", "citation"};
  return kFields.find(name) != kFields.end();
}

namespace {

// ---- rule DSL lexer ----

enum class TokKind { IDENT, STRING, NUMBER, OP, LPAREN, RPAREN, END };

struct Tok {
  TokKind kind = TokKind::END;
  std::string value;
  int line = 0;
  int col = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Tok> all() {
    std::vector<Tok> out;
    while (true) {
      Tok t = next();
      bool end = t.kind == TokKind::END;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& why) {
    throw Error(ErrorCode::syntax_error,
                "line " + std::to_string(line_) + " col " + std::to_string(col_) + ": " + why);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  Tok next() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '#') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
    Tok t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) return t;

    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = TokKind::IDENT;
      while (pos_ < text_.size()) {
        char d = peek();
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '-' || d == '.') {
          t.value.push_back(advance());
        } else {
          break;
        }
      }
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = TokKind::NUMBER;
      while (pos_ < text_.size()) {
        char d = peek();
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == ',') {
          t.value.push_back(advance());
        } else {
          break;
        }
      }
      return t;
    }
    switch (c) {
      case '"': {
        advance();
        t.kind = TokKind::STRING;
        while (true) {
          if (pos_ >= text_.size()) fail("unterminated string");
          char d = advance();
          if (d == '"') break;
          if (d == '\\') {
            if (pos_ >= text_.size()) fail("unterminated escape");
            char e = advance();
            if (e == '"' || e == '\\') t.value.push_back(e);
            else fail(std::string("unknown escape: \\") + e);
          } else {
            t.value.push_back(d);
          }
        }
        return t;
      }
      case '(': advance(); t.kind = TokKind::LPAREN; t.value = "("; return t;
      case ')': advance(); t.kind = TokKind::RPAREN; t.value = ")"; return t;
      case '=': advance(); t.kind = TokKind::OP; t.value = "="; return t;
      case '!':
        advance();
        if (peek() != '=') fail("expected '=' after '!'");
        advance();
        t.kind = TokKind::OP;
        t.value = "!=";
        return t;
      case '>':
      case '<': {
        char first = advance();
        if (peek() != '=') fail(std::string("expected '=' after '") + first + "'");
        advance();
        t.kind = TokKind::OP;
        t.value = std::string(1, first) + "=";
        return t;
      }
      default:
        fail(std::string("unexpected character: '") + c + "'");
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---- rule DSL parser ----

class RuleParser {
 public:
  explicit RuleParser(std::vector<Tok> tokens) : tokens_(std::move(tokens)) {}

  std::vector<Subscription> parse() {
    std::vector<Subscription> out;
    while (peek().kind != TokKind::END) {
      out.push_back(parse_block());
    }
    return out;
  }

 private:
  const Tok& peek() const { return tokens_[pos_]; }
  const Tok& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const Tok& at, const std::string& why) {
    throw Error(ErrorCode::syntax_error,
                "line " + std::to_string(at.line) + " col " + std::to_string(at.col) + ": " + why);
  }

  const Tok& expect_ident(const std::string& word) {
    const Tok& t = advance();
    if (t.kind != TokKind::IDENT || t.value != word) {
      fail(t, "expected '" + word + "'");
    }
    return t;
  }

  Subscription parse_block() {
    expect_ident("subscriber");
    const Tok& id = advance();
    if (id.kind != TokKind::IDENT) fail(id, "expected subscriber id");
    Subscription sub;
    sub.subscriber_id = id.value;

    const Tok& what = advance();
    if (what.kind == TokKind::IDENT && what.value == "when") {
      sub.kind = SubscriptionKind::RULE;
      sub.rule = parse_or();
    } else if (what.kind == TokKind::IDENT && what.value == "role") {
      sub.kind = SubscriptionKind::ROLE;
      const Tok& description = advance();
      if (description.kind != TokKind::STRING) fail(description, "expected quoted role description");
      for (const auto& tok : text::tokenize(description.value)) {
        if (tok.kind == text::TokenKind::WORD) {
          sub.role_description.push_back(to_lower(tok.surface));
        }
      }
      expect_ident("threshold");
      const Tok& threshold = advance();
      if (threshold.kind != TokKind::NUMBER) fail(threshold, "expected threshold value");
      auto value = Decimal::parse(threshold.value);
      if (!value) fail(threshold, "bad threshold: " + threshold.value);
      Rational ratio = Rational::from_decimal(*value);
      if (ratio <= Rational(0, 1) || Rational(1, 1) < ratio) {
        fail(threshold, "threshold must be in (0, 1]");
      }
      sub.similarity_threshold = ratio;
    } else {
      fail(what, "expected 'when' or 'role'");
    }
    return sub;
  }

  RuleExpr parse_or() {
    RuleExpr left = parse_and();
    while (peek().kind == TokKind::IDENT && peek().value == "or") {
      advance();
      RuleExpr right = parse_and();
      if (left.kind == RuleExpr::Kind::OR) {
        left.children.push_back(std::move(right));
      } else {
        RuleExpr node;
        node.kind = RuleExpr::Kind::OR;
        node.children.push_back(std::move(left));
        node.children.push_back(std::move(right));
        left = std::move(node);
      }
    }
    return left;
  }

  RuleExpr parse_and() {
    RuleExpr left = parse_primary();
    while (peek().kind == TokKind::IDENT && peek().value == "and") {
      advance();
      RuleExpr right = parse_primary();
      if (left.kind == RuleExpr::Kind::AND) {
        left.children.push_back(std::move(right));
      } else {
        RuleExpr node;
        node.kind = RuleExpr::Kind::AND;
        node.children.push_back(std::move(left));
        node.children.push_back(std::move(right));
        left = std::move(node);
      }
    }
    return left;
  }

  RuleExpr parse_primary() {
    if (peek().kind == TokKind::LPAREN) {
      advance();
      RuleExpr inner = parse_or();
      const Tok& close = advance();
      if (close.kind != TokKind::RPAREN) fail(close, "expected ')'");
      return inner;
    }
    const Tok& field = advance();
    if (field.kind != TokKind::IDENT) fail(field, "expected field name");
    if (field.value == "subscriber" || field.value == "when" || field.value == "role") {
      fail(field, "expected a comparison, found keyword '" + field.value + "'");
    }
    if (!is_rule_field(field.value)) throw Error(ErrorCode::unknown_field, field.value);

    const Tok& op = advance();
    CompareOp cop;
    if (op.kind == TokKind::OP && op.value == "=") cop = CompareOp::EQ;
    else if (op.kind == TokKind::OP && op.value == "!=") cop = CompareOp::NE;
    else if (op.kind == TokKind::OP && op.value == ">=") cop = CompareOp::GE;
    else if (op.kind == TokKind::OP && op.value == "<=") cop = CompareOp::LE;
    else if (op.kind == TokKind::IDENT && op.value == "contains") cop = CompareOp::CONTAINS;
    else fail(op, "expected comparison operator");

    const Tok& literal = advance();
    RuleExpr node;
    node.kind = RuleExpr::Kind::CMP;
    node.cmp.field = field.value;
    node.cmp.op = cop;
    if (literal.kind == TokKind::STRING) {
      node.cmp.literal = literal.value;
    } else if (literal.kind == TokKind::NUMBER) {
      auto value = Decimal::parse(literal.value);
      if (!value) fail(literal, "bad number: " + literal.value);
      node.cmp.literal = *value;
    } else {
      fail(literal, "expected string or number literal");
    }
    return node;
  }

  std::vector<Tok> tokens_;
  size_t pos_ = 0;
};

using FieldValue = std::variant<std::string, Decimal>;

std::optional<FieldValue> field_value(const fuse::DataModelInstance& instance,
                                      const std::string& field) {
  if (field == "authority") {
    if (instance.authority) return FieldValue(*instance.authority);
    return std::nullopt;
  }
  if (field == "regulated_entity") {
    if (instance.regulated_entity) return FieldValue(*instance.regulated_entity);
    return std::nullopt;
  }
  if (field == "threshold") {
    if (instance.threshold) return FieldValue(*instance.threshold);
    return std::nullopt;
  }
  if (field == "citation") {
    if (instance.citation) return FieldValue(*instance.citation);
    return std::nullopt;
  }
  if (field == "direction") {
    if (instance.direction == fuse::Direction::UNSPECIFIED) return std::nullopt;
    return FieldValue(std::string(fuse::to_string(instance.direction)));
  }
  if (field == "quantity.value") {
    if (instance.quantity) return FieldValue(instance.quantity->value);
    return std::nullopt;
  }
  if (field == "quantity.unit") {
    if (instance.quantity) return FieldValue(std::string(text::to_string(instance.quantity->unit)));
    return std::nullopt;
  }
  return std::nullopt;
}

bool compare(const Comparison& cmp, const std::optional<FieldValue>& value) {
  // Missing fields compare unequal: only '!=' holds.
  if (!value) return cmp.op == CompareOp::NE;

  if (std::holds_alternative<Decimal>(*value) && std::holds_alternative<Decimal>(cmp.literal)) {
    const Decimal& lhs = std::get<Decimal>(*value);
    const Decimal& rhs = std::get<Decimal>(cmp.literal);
    switch (cmp.op) {
      case CompareOp::EQ: return lhs == rhs;
      case CompareOp::NE: return !(lhs == rhs);
      case CompareOp::GE: return lhs >= rhs;
      case CompareOp::LE: return lhs <= rhs;
      case CompareOp::CONTAINS: return lhs.to_string().find(rhs.to_string()) != std::string::npos;
    }
  }
  if (std::holds_alternative<std::string>(*value) &&
      std::holds_alternative<std::string>(cmp.literal)) {
    const std::string& lhs = std::get<std::string>(*value);
    const std::string& rhs = std::get<std::string>(cmp.literal);
    switch (cmp.op) {
      case CompareOp::EQ: return lhs == rhs;
      case CompareOp::NE: return lhs != rhs;
      case CompareOp::GE: return lhs >= rhs;
      case CompareOp::LE: return lhs <= rhs;
      case CompareOp::CONTAINS: return lhs.find(rhs) != std::string::npos;
    }
  }
  // Type mismatch behaves like a missing field.
  return cmp.op == CompareOp::NE;
}

}  // namespace

std::vector<Subscription> parse_rules(const std::string& text) {
  Lexer lexer(text);
  RuleParser parser(lexer.all());
  return parser.parse();
}

bool evaluate_rule(const RuleExpr& expr, const fuse::DataModelInstance& instance,
                   std::vector<std::string>* matched_fields) {
  switch (expr.kind) {
    case RuleExpr::Kind::CMP: {
      bool hit = compare(expr.cmp, field_value(instance, expr.cmp.field));
      if (hit && matched_fields) matched_fields->push_back(expr.cmp.field);
      return hit;
    }
    case RuleExpr::Kind::AND: {
      bool all = true;
      for (const auto& child : expr.children) {
        if (!evaluate_rule(child, instance, matched_fields)) all = false;
      }
      return all;
    }
    case RuleExpr::Kind::OR: {
      bool any = false;
      for (const auto& child : expr.children) {
        if (evaluate_rule(child, instance, matched_fields)) any = true;
      }
      return any;
    }
  }
  return false;
}

Taxonomy Taxonomy::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

Taxonomy Taxonomy::from_lines(const std::vector<std::string>& lines) {
  Taxonomy out;
  for (const auto& line : lines) {
    auto parts = split(line, '\t');
    if (parts.size() != 2) {
      throw Error(ErrorCode::malformed_input, "taxonomy entry needs child<TAB>parent: " + line);
    }
    std::string child = to_lower(trim(parts[0]));
    std::string parent = to_lower(trim(parts[1]));
    if (child.empty() || parent.empty()) {
      throw Error(ErrorCode::malformed_input, "taxonomy entry with empty term: " + line);
    }
    auto [it, inserted] = out.parent_.emplace(child, parent);
    if (!inserted && it->second != parent) {
      throw Error(ErrorCode::malformed_input, "conflicting parents for term: " + child);
    }
  }

  for (const auto& [child, parent] : out.parent_) {
    if (child == parent) {
      if (!out.root_.empty()) throw Error(ErrorCode::multiple_roots, out.root_ + ", " + child);
      out.root_ = child;
    }
  }

  // Depth via chain walking; detects cycles and terms whose parent was never
  // defined as a child.
  for (const auto& [term, _] : out.parent_) {
    std::vector<std::string> chain;
    std::set<std::string> visited;
    std::string current = term;
    while (true) {
      if (!visited.insert(current).second) {
        throw Error(ErrorCode::cycle_detected, "at term: " + current);
      }
      chain.push_back(current);
      auto it = out.parent_.find(current);
      if (it == out.parent_.end()) throw Error(ErrorCode::orphan_term, current);
      if (it->second == current) break;  // reached the root
      current = it->second;
    }
    int d = static_cast<int>(chain.size());
    for (const auto& t : chain) out.depth_.emplace(t, d--);
  }
  if (out.root_.empty() && !out.parent_.empty()) {
    // No self-parented term: chains above either cycled or orphaned already,
    // so this is unreachable for non-empty input; guard anyway.
    throw Error(ErrorCode::orphan_term, "no root");
  }
  return out;
}

bool Taxonomy::contains(std::string_view term) const {
  return parent_.find(std::string(term)) != parent_.end();
}

int Taxonomy::depth(const std::string& term) const {
  auto it = depth_.find(term);
  if (it == depth_.end()) throw Error(ErrorCode::unknown_term, term);
  return it->second;
}

Rational wup_similarity(const Taxonomy& taxonomy, const std::string& a, const std::string& b) {
  if (!taxonomy.contains(a)) throw Error(ErrorCode::unknown_term, a);
  if (!taxonomy.contains(b)) throw Error(ErrorCode::unknown_term, b);

  std::set<std::string> ancestors_of_a;
  std::string current = a;
  while (true) {
    ancestors_of_a.insert(current);
    const std::string& parent = taxonomy.parents().at(current);
    if (parent == current) break;
    current = parent;
  }
  // Walking up from b, the first shared ancestor is the deepest one.
  current = b;
  while (!ancestors_of_a.count(current)) current = taxonomy.parents().at(current);

  int lcs_depth = taxonomy.depth(current);
  return Rational(2LL * lcs_depth, taxonomy.depth(a) + taxonomy.depth(b));
}

SemanticScore semantic_score(const std::vector<std::string>& role_tokens,
                             const std::vector<std::string>& metadata_tokens,
                             const Taxonomy& taxonomy) {
  SemanticScore out;
  std::vector<std::string> role;
  std::vector<std::string> metadata;
  for (const auto& t : role_tokens) {
    std::string lowered = to_lower(t);
    if (taxonomy.contains(lowered)) role.push_back(lowered);
    else ++out.role_excluded;
  }
  for (const auto& t : metadata_tokens) {
    std::string lowered = to_lower(t);
    if (taxonomy.contains(lowered)) metadata.push_back(lowered);
    else ++out.metadata_excluded;
  }
  if (role.empty() || metadata.empty()) return out;  // score 0

  Rational sum;
  for (const auto& r : role) {
    Rational best;
    for (const auto& m : metadata) {
      Rational s = wup_similarity(taxonomy, r, m);
      if (s > best) best = s;
    }
    sum = sum + best;
  }
  out.value = sum / static_cast<long long>(role.size());
  return out;
}

const char* to_string(AlertReason reason) {
  return reason == AlertReason::RULE_MATCH ? "rule_match" : "similarity";
}

std::vector<std::string> instance_metadata_tokens(const fuse::DataModelInstance& instance) {
  // Filled slot values plus predicate labels; triple subject/object surfaces
  // are not metadata.
  std::vector<std::string> parts;
  if (instance.authority) parts.push_back(*instance.authority);
  if (instance.regulated_entity) parts.push_back(*instance.regulated_entity);
  if (instance.threshold) parts.push_back(*instance.threshold);
  if (instance.quantity) {
    parts.push_back(instance.quantity->value.to_string());
    parts.push_back(text::to_string(instance.quantity->unit));
  }
  if (instance.direction != fuse::Direction::UNSPECIFIED) {
    parts.push_back(fuse::to_string(instance.direction));
  }
  if (instance.effective_date) parts.push_back(instance.effective_date->to_string());
  if (instance.citation) parts.push_back(*instance.citation);
  for (const auto& t : instance.triples) parts.push_back(t.predicate_label);

  std::vector<std::string> out;
  for (const auto& part : parts) {
    for (const auto& tok : text::tokenize(part)) {
      if (tok.kind == text::TokenKind::WORD) out.push_back(to_lower(tok.surface));
    }
  }
  return out;
}

std::vector<Alert> generate_alerts(const fuse::DataModelInstance& instance,
                                   const std::vector<Subscription>& subscriptions,
                                   const Taxonomy& taxonomy) {
  std::vector<Alert> out;
  std::set<std::string> alerted;
  std::vector<std::string> metadata = instance_metadata_tokens(instance);

  for (const auto& sub : subscriptions) {
    if (alerted.count(sub.subscriber_id)) continue;
    if (sub.kind == SubscriptionKind::RULE) {
      std::vector<std::string> fields;
      if (!sub.rule || !evaluate_rule(*sub.rule, instance, &fields)) continue;
      std::sort(fields.begin(), fields.end());
      fields.erase(std::unique(fields.begin(), fields.end()), fields.end());
      Alert alert;
      alert.subscriber_id = sub.subscriber_id;
      alert.article_id = instance.article_id;
      alert.reason = AlertReason::RULE_MATCH;
      alert.matched_fields = std::move(fields);
      out.push_back(std::move(alert));
      alerted.insert(sub.subscriber_id);
    } else {
      if (!sub.similarity_threshold) continue;
      SemanticScore score = semantic_score(sub.role_description, metadata, taxonomy);
      if (score.value < *sub.similarity_threshold) continue;
      Alert alert;
      alert.subscriber_id = sub.subscriber_id;
      alert.article_id = instance.article_id;
      alert.reason = AlertReason::SIMILARITY;
      alert.score = score.value;
      std::set<std::string> in_taxonomy;
      for (const auto& t : sub.role_description) {
        if (taxonomy.contains(to_lower(t))) in_taxonomy.insert(to_lower(t));
      }
      alert.matched_fields.assign(in_taxonomy.begin(), in_taxonomy.end());
      out.push_back(std::move(alert));
      alerted.insert(sub.subscriber_id);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Alert& a, const Alert& b) { return a.subscriber_id < b.subscriber_id; });
  return out;
}

std::string alert_to_json(const Alert& alert) {
  json j;
  j["subscriber_id"] = alert.subscriber_id;
  j["article_id"] = alert.article_id;
  j["reason"] = to_string(alert.reason);
  if (alert.score) j["score"] = alert.score->to_string();
  j["matched_fields"] = alert.matched_fields;
  return j.dump();
}

}  // namespace regwatch::notify
