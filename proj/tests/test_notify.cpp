#include <doctest.h>

#include <random>

#include "regwatch/errors.hpp"
#include "regwatch/notify.hpp"

using namespace regwatch;
using namespace regwatch::notify;

namespace {

Taxonomy four_terms() {
  return Taxonomy::from_lines(
      {"entity\tentity", "institution\tentity", "bank\tinstitution", "regulator\tinstitution"});
}

fuse::DataModelInstance increase_instance() {
  fuse::DataModelInstance instance;
  instance.article_id = "2020-0001";
  instance.authority = "Federal Reserve";
  instance.threshold = "asset threshold";
  instance.direction = fuse::Direction::INCREASE;
  text::QuantityMention q;
  q.value = *Decimal::parse("3000000000");
  q.unit = text::Unit::USD;
  instance.quantity = q;
  return instance;
}

}  // namespace

TEST_CASE("rule blocks parse") {
  auto subs = parse_rules(
      "subscriber risk-team\n"
      "when direction = \"increase\" and quantity.value >= 1000000000\n");
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].subscriber_id == "risk-team");
  CHECK(subs[0].kind == SubscriptionKind::RULE);
  REQUIRE(subs[0].rule);
  CHECK(subs[0].rule->kind == RuleExpr::Kind::AND);
}

TEST_CASE("unknown fields are rejected by name") {
  try {
    parse_rules("subscriber a\nwhen color = \"red\"\n");
    FAIL("expected UnknownField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_field);
    CHECK(e.detail() == "color");
  }
}

TEST_CASE("and binds tighter than or") {
  auto subs = parse_rules(
      "subscriber p\n"
      "when authority = \"x\" or threshold = \"y\" and citation = \"z\"\n");
  REQUIRE(subs.size() == 1);
  const RuleExpr& expr = *subs[0].rule;

  fuse::DataModelInstance only_a;
  only_a.authority = "x";
  CHECK(evaluate_rule(expr, only_a));  // a ∨ (b ∧ c) with a true

  fuse::DataModelInstance b_and_c;
  b_and_c.threshold = "y";
  b_and_c.citation = "z";
  CHECK(evaluate_rule(expr, b_and_c));

  fuse::DataModelInstance only_b;
  only_b.threshold = "y";
  CHECK_FALSE(evaluate_rule(expr, only_b));
}

TEST_CASE("parentheses override precedence") {
  auto subs = parse_rules(
      "subscriber p\n"
      "when (authority = \"x\" or threshold = \"y\") and citation = \"z\"\n");
  fuse::DataModelInstance only_a;
  only_a.authority = "x";
  CHECK_FALSE(evaluate_rule(*subs[0].rule, only_a));
}

TEST_CASE("syntax errors carry position") {
  try {
    parse_rules("subscriber a\nwhen direction = \n");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::syntax_error);
    CHECK(e.detail().find("line") != std::string::npos);
  }
}

TEST_CASE("role blocks parse with thresholds") {
  auto subs = parse_rules("subscriber ops\nrole \"bank compliance\" threshold 0.7\n");
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].kind == SubscriptionKind::ROLE);
  CHECK(subs[0].role_description == std::vector<std::string>{"bank", "compliance"});
  CHECK(*subs[0].similarity_threshold == Rational(7, 10));
  CHECK_THROWS_AS(parse_rules("subscriber ops\nrole \"bank\" threshold 1.5\n"), Error);
  CHECK_THROWS_AS(parse_rules("subscriber ops\nrole \"bank\" threshold 0\n"), Error);
}

TEST_CASE("missing fields compare unequal") {
  fuse::DataModelInstance empty;
  auto eval = [&](const std::string& rule) {
    auto subs = parse_rules("subscriber t\nwhen " + rule + "\n");
    return evaluate_rule(*subs[0].rule, empty);
  };
  CHECK_FALSE(eval("direction = \"increase\""));
  CHECK(eval("direction != \"increase\""));
  CHECK_FALSE(eval("quantity.value >= 1"));
  CHECK_FALSE(eval("quantity.value <= 1"));
  CHECK_FALSE(eval("authority contains \"Fed\""));
}

TEST_CASE("evaluation is total on type mismatches") {
  fuse::DataModelInstance instance = increase_instance();
  auto subs = parse_rules("subscriber t\nwhen authority >= 5\n");
  CHECK_FALSE(evaluate_rule(*subs[0].rule, instance));
  auto subs2 = parse_rules("subscriber t\nwhen quantity.value = \"three\"\n");
  CHECK_FALSE(evaluate_rule(*subs2[0].rule, instance));
}

TEST_CASE("taxonomy loads and validates") {
  auto tax = four_terms();
  CHECK(tax.root() == "entity");
  CHECK(tax.depth("entity") == 1);
  CHECK(tax.depth("institution") == 2);
  CHECK(tax.depth("bank") == 3);
  CHECK(tax.contains("regulator"));
  CHECK_FALSE(tax.contains("color"));
}

TEST_CASE("taxonomy error cases") {
  try {
    Taxonomy::from_lines({"a\tb", "b\ta"});
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cycle_detected);
  }
  try {
    Taxonomy::from_lines({"a\ta", "b\tb"});
    FAIL("expected MultipleRoots");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::multiple_roots);
  }
  try {
    Taxonomy::from_lines({"root\troot", "a\tghost"});
    FAIL("expected OrphanTerm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::orphan_term);
    CHECK(e.detail() == "ghost");
  }
}

TEST_CASE("wu-palmer worked examples") {
  auto tax = four_terms();
  CHECK(wup_similarity(tax, "bank", "bank") == Rational(1, 1));
  // depth(institution)=2, depth(bank)=depth(regulator)=3: 2*2/(3+3) = 2/3
  CHECK(wup_similarity(tax, "bank", "regulator") == Rational(2, 3));
  // 2*1/(1+3) = 0.5
  CHECK(wup_similarity(tax, "entity", "bank") == Rational(1, 2));
  CHECK_THROWS_AS(wup_similarity(tax, "bank", "color"), Error);
}

TEST_CASE("wu-palmer is symmetric, positive, and 1 only on identity") {
  std::mt19937 rng(555);
  for (int trial = 0; trial < 30; ++trial) {
    // Random tree: term i's parent is a random earlier term.
    size_t n = 2 + rng() % 40;
    std::vector<std::string> lines = {"t0\tt0"};
    for (size_t i = 1; i < n; ++i) {
      lines.push_back("t" + std::to_string(i) + "\tt" + std::to_string(rng() % i));
    }
    auto tax = Taxonomy::from_lines(lines);
    for (int probe = 0; probe < 12; ++probe) {
      std::string a = "t" + std::to_string(rng() % n);
      std::string b = "t" + std::to_string(rng() % n);
      Rational ab = wup_similarity(tax, a, b);
      CHECK(ab == wup_similarity(tax, b, a));
      CHECK(ab > Rational(0, 1));
      CHECK(ab <= Rational(1, 1));
      if (a == b) CHECK(ab == Rational(1, 1));
      if (ab == Rational(1, 1)) CHECK(a == b);

      // Oracle: enumerate full ancestor paths, intersect, take the deepest.
      auto path_of = [&](std::string term) {
        std::vector<std::string> path;
        while (true) {
          path.push_back(term);
          const std::string& parent = tax.parents().at(term);
          if (parent == term) break;
          term = parent;
        }
        return path;
      };
      auto pa = path_of(a);
      auto pb = path_of(b);
      int best = 0;
      for (const auto& x : pa) {
        for (const auto& y : pb) {
          if (x == y) best = std::max(best, tax.depth(x));
        }
      }
      CHECK(ab == Rational(2LL * best, tax.depth(a) + tax.depth(b)));
    }
  }
}

TEST_CASE("semantic score worked examples") {
  auto tax = four_terms();
  CHECK(semantic_score({"bank"}, {"bank"}, tax).value == Rational(1, 1));
  CHECK(semantic_score({"bank"}, {"regulator"}, tax).value == Rational(2, 3));
  // mean(1, 2/3) = 5/6
  CHECK(semantic_score({"bank", "regulator"}, {"bank"}, tax).value == Rational(5, 6));
}

TEST_CASE("out-of-taxonomy tokens are excluded and counted") {
  auto tax = four_terms();
  auto score = semantic_score({"bank", "zebra"}, {"bank", "quark"}, tax);
  CHECK(score.value == Rational(1, 1));
  CHECK(score.role_excluded == 1);
  CHECK(score.metadata_excluded == 1);
  CHECK(semantic_score({"zebra"}, {"bank"}, tax).value == Rational(0, 1));
}

TEST_CASE("rule alerts fire on matching instances") {
  auto subs = parse_rules(
      "subscriber risk-team\n"
      "when direction = \"increase\" and quantity.value >= 1000000000\n");
  auto alerts = generate_alerts(increase_instance(), subs, four_terms());
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].subscriber_id == "risk-team");
  CHECK(alerts[0].article_id == "2020-0001");
  CHECK(alerts[0].reason == AlertReason::RULE_MATCH);
  CHECK_FALSE(alerts[0].score);
  CHECK(alerts[0].matched_fields == std::vector<std::string>{"direction", "quantity.value"});
}

TEST_CASE("no subscriptions, no alerts") {
  CHECK(generate_alerts(increase_instance(), {}, four_terms()).empty());
}

TEST_CASE("role alerts score the metadata") {
  auto subs = parse_rules("subscriber ops\nrole \"bank\" threshold 0.7\n");
  fuse::DataModelInstance instance;
  instance.article_id = "x";
  instance.regulated_entity = "bank";
  auto alerts = generate_alerts(instance, subs, four_terms());
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].reason == AlertReason::SIMILARITY);
  REQUIRE(alerts[0].score);
  CHECK(*alerts[0].score == Rational(1, 1));
}

TEST_CASE("below-threshold roles stay silent") {
  auto subs = parse_rules("subscriber ops\nrole \"bank\" threshold 0.7\n");
  fuse::DataModelInstance instance;
  instance.article_id = "x";
  instance.regulated_entity = "regulator";  // wup(bank, regulator) = 2/3 < 0.7
  CHECK(generate_alerts(instance, subs, four_terms()).empty());
}

TEST_CASE("one alert per subscriber per article") {
  auto subs = parse_rules(
      "subscriber dup\nwhen direction = \"increase\"\n"
      "subscriber dup\nwhen quantity.value >= 1\n");
  auto alerts = generate_alerts(increase_instance(), subs, four_terms());
  CHECK(alerts.size() == 1);
}

TEST_CASE("alerts are ordered by subscriber") {
  auto subs = parse_rules(
      "subscriber zeta\nwhen direction = \"increase\"\n"
      "subscriber alpha\nwhen direction = \"increase\"\n");
  auto alerts = generate_alerts(increase_instance(), subs, four_terms());
  REQUIRE(alerts.size() == 2);
  CHECK(alerts[0].subscriber_id == "alpha");
  CHECK(alerts[1].subscriber_id == "zeta");
}

TEST_CASE("metadata tokens come from slots and predicates") {
  fuse::DataModelInstance instance = increase_instance();
  relate::RelationTriple t;
  t.subject.surface = "The Board";
  t.object.surface = "the cap";
  t.predicate_label = "comply_with";
  instance.triples.push_back(t);
  auto tokens = instance_metadata_tokens(instance);
  // Slot words are present, lowercased.
  CHECK(std::count(tokens.begin(), tokens.end(), "federal") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "asset") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "increase") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "comply") == 1);
  CHECK(std::count(tokens.begin(), tokens.end(), "with") == 1);
  // Triple endpoint surfaces are not metadata.
  CHECK(std::count(tokens.begin(), tokens.end(), "board") == 0);
}
