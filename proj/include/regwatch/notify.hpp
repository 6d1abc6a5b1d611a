#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "regwatch/decimal.hpp"
#include "regwatch/fuse.hpp"

namespace regwatch::notify {

enum class CompareOp { EQ, NE, GE, LE, CONTAINS };

// Instance fields a rule may reference.
bool is_rule_field(std::string_view name);

struct Comparison {
  std::string field;
  CompareOp op = CompareOp::EQ;
  std::variant<std::string, Decimal> literal;
};

// Predicate tree over instance fields; `and` binds tighter than `or`.
struct RuleExpr {
  enum class Kind { CMP, AND, OR };
  Kind kind = Kind::CMP;
  Comparison cmp;                  // kind == CMP
  std::vector<RuleExpr> children;  // kind == AND / OR
};

enum class SubscriptionKind { RULE, ROLE };

struct Subscription {
  std::string subscriber_id;
  SubscriptionKind kind = SubscriptionKind::RULE;
  std::optional<RuleExpr> rule;                    // RULE
  std::vector<std::string> role_description;      // ROLE: lowercased word tokens
  std::optional<Rational> similarity_threshold;   // ROLE: in (0, 1]
};

// Rule DSL, one subscription per block:
//   subscriber <id>
//   when <expr>                      -- or --
//   role "<free text>" threshold <decimal>
std::vector<Subscription> parse_rules(const std::string& text);

// Evaluation is total: missing fields (and type-mismatched comparisons)
// make '=', '>=', '<=', 'contains' false and '!=' true. Comparisons that
// evaluated true report their field names through `matched_fields`.
bool evaluate_rule(const RuleExpr& expr, const fuse::DataModelInstance& instance,
                   std::vector<std::string>* matched_fields = nullptr);

// Is-a hierarchy loaded from child<TAB>parent lines with one self-parented
// root; stands in for a WordNet export.
class Taxonomy {
 public:
  static Taxonomy load(const std::string& path);
  static Taxonomy from_lines(const std::vector<std::string>& lines);

  bool contains(std::string_view term) const;
  int depth(const std::string& term) const;  // depth(root) == 1
  const std::string& root() const { return root_; }
  const std::map<std::string, std::string>& parents() const { return parent_; }

 private:
  std::map<std::string, std::string> parent_;
  std::map<std::string, int> depth_;
  std::string root_;
};

// Wu-Palmer: 2*depth(lcs) / (depth(a) + depth(b)), exact rational.
Rational wup_similarity(const Taxonomy& taxonomy, const std::string& a, const std::string& b);

struct SemanticScore {
  Rational value;                // mean over role tokens of max wup similarity
  size_t role_excluded = 0;      // tokens outside the taxonomy, dropped
  size_t metadata_excluded = 0;
};

SemanticScore semantic_score(const std::vector<std::string>& role_tokens,
                             const std::vector<std::string>& metadata_tokens,
                             const Taxonomy& taxonomy);

enum class AlertReason { RULE_MATCH, SIMILARITY };

const char* to_string(AlertReason reason);

struct Alert {
  std::string subscriber_id;
  std::string article_id;
  AlertReason reason = AlertReason::RULE_MATCH;
  std::optional<Rational> score;           // SIMILARITY only
  std::vector<std::string> matched_fields; // rule fields, or in-taxonomy role tokens
};

// Metadata tokens for ROLE matching: word tokens of the filled slot values
// plus the triple predicate labels, lowercased.
std::vector<std::string> instance_metadata_tokens(const fuse::DataModelInstance& instance);

// At most one alert per (subscriber, article); first matching subscription
// wins. Output ordered by subscriber_id.
std::vector<Alert> generate_alerts(const fuse::DataModelInstance& instance,
                                   const std::vector<Subscription>& subscriptions,
                                   const Taxonomy& taxonomy);

std::string alert_to_json(const Alert& alert);

}  // namespace regwatch::notify
