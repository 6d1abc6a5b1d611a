#include <doctest.h>

#include <filesystem>
#include <random>

#include "regwatch/errors.hpp"
#include "regwatch/kgraph.hpp"
#include "regwatch/textfile.hpp"

using namespace regwatch;
using namespace regwatch::kg;

namespace {

const std::string kData = REGWATCH_DATA_DIR;

AliasMap no_aliases() { return AliasMap::from_lines({}); }

fuse::DataModelInstance sample_instance() {
  fuse::DataModelInstance instance;
  instance.article_id = "2020-0001";
  instance.authority = "Federal Reserve";
  instance.threshold = "asset threshold";
  instance.direction = fuse::Direction::INCREASE;

  relate::RelationTriple triple;
  triple.subject.surface = "The Board";
  triple.subject.entity_type = extract::EntityType::REGULATORY_AUTHORITY;
  triple.object.surface = "the asset threshold";
  triple.object.entity_type = extract::EntityType::REGULATED_ACTIVITY_THRESHOLD;
  triple.predicate_label = "increase";
  triple.article_id = instance.article_id;
  triple.sentence_index = 0;
  triple.provenance = relate::Provenance::VERB_PATH;
  instance.triples.push_back(triple);
  return instance;
}

std::vector<ingest::InstitutionRecord> nic_fixture() {
  return ingest::parse_nic_csv(read_file(kData + "/nic_sample.csv"),
                               ingest::EntityKindTable::load(kData + "/nic_entity_kinds.tsv"));
}

Graph random_graph(std::mt19937& rng) {
  Graph g;
  MergeReport report;
  size_t nodes = 1 + rng() % 12;
  std::vector<std::string> keys;
  for (size_t i = 0; i < nodes; ++i) {
    std::string key = "n" + std::to_string(rng() % 40);
    g.add_node(key, (rng() % 2) ? "bank" : "untyped");
    if (rng() % 3 == 0) g.add_surface_form(key, "Form " + std::to_string(rng() % 5));
    if (rng() % 4 == 0) g.set_property(key, "assets", std::to_string(rng() % 1000));
    keys.push_back(key);
  }
  size_t edges = rng() % 20;
  for (size_t i = 0; i < edges; ++i) {
    const std::string& from = keys[rng() % keys.size()];
    const std::string& to = keys[rng() % keys.size()];
    std::string label = "l" + std::to_string(rng() % 5);
    g.add_edge(from, label, to, "art-" + std::to_string(rng() % 9) + "#" + std::to_string(rng() % 4),
               report);
  }
  return g;
}

}  // namespace

TEST_CASE("canonicalize folds case, whitespace, and articles") {
  CHECK(canonicalize("The  Federal Reserve", no_aliases()) == "federal reserve");
  CHECK(canonicalize("bank", no_aliases()) == "bank");
  CHECK(canonicalize("  An Example  ", no_aliases()) == "example");
  CHECK_THROWS_AS(canonicalize("", no_aliases()), Error);
  CHECK_THROWS_AS(canonicalize("   ", no_aliases()), Error);
  CHECK_THROWS_AS(canonicalize("the", no_aliases()), Error);
}

TEST_CASE("alias map applies after folding") {
  auto aliases = AliasMap::from_lines({"fed\tfederal reserve system",
                                       "federal reserve\tfederal reserve system"});
  CHECK(canonicalize("Fed", aliases) == "federal reserve system");
  CHECK(canonicalize("the Federal  Reserve", aliases) == "federal reserve system");
  CHECK(canonicalize("bank", aliases) == "bank");
}

TEST_CASE("merging an instance reifies the event") {
  Graph g;
  auto report = g.merge_instance(sample_instance(), no_aliases());
  // Event + authority + threshold + direction + triple subject; the triple
  // object collapses into the threshold slot node after canonicalization.
  CHECK(report.nodes_added == 5);
  CHECK(report.edges_added == 4);  // 3 slot edges + 1 verb edge
  CHECK(report.edges_deduplicated == 0);
  CHECK(g.nodes().count("2020-0001") == 1);
  CHECK(g.nodes().count("federal reserve") == 1);
  CHECK(g.nodes().count("asset threshold") == 1);
  CHECK(g.nodes().count("increase") == 1);
  CHECK(g.nodes().count("board") == 1);
  CHECK(g.nodes().at("2020-0001").label == "event");
  CHECK(g.edges().count(EdgeKey{"board", "increase", "asset threshold"}) == 1);
  CHECK(g.check_integrity());
}

TEST_CASE("re-merging the same instance adds nothing") {
  Graph g;
  g.merge_instance(sample_instance(), no_aliases());
  Graph before = g;
  auto second = g.merge_instance(sample_instance(), no_aliases());
  CHECK(second.nodes_added == 0);
  CHECK(second.edges_added == 0);
  CHECK(second.edges_deduplicated == 4);
  CHECK(g == before);
}

TEST_CASE("empty instances create only the event node") {
  Graph g;
  fuse::DataModelInstance instance;
  instance.article_id = "lonely";
  auto report = g.merge_instance(instance, no_aliases());
  CHECK(report.nodes_added == 1);
  CHECK(report.edges_added == 0);
  CHECK(g.nodes().size() == 1);
}

TEST_CASE("surface forms accumulate") {
  Graph g;
  auto instance = sample_instance();
  g.merge_instance(instance, no_aliases());
  instance.authority = "FEDERAL  reserve";
  g.merge_instance(instance, no_aliases());
  CHECK(g.nodes().at("federal reserve").properties.at("surface_forms") ==
        "FEDERAL  reserve|Federal Reserve");
}

TEST_CASE("nic: bank with its holding company") {
  std::vector<ingest::InstitutionRecord> records(2);
  records[0].rssd_id = "1001";
  records[0].name = "First Bank";
  records[0].kind = ingest::InstitutionKind::BANK;
  records[0].parent_rssd_id = "2002";
  records[1].rssd_id = "2002";
  records[1].name = "First Holdings";
  records[1].kind = ingest::InstitutionKind::HOLDING_COMPANY;
  Graph g;
  auto report = g.ingest_nic(records, NicLinkColumns{});
  CHECK(report.nodes_added == 2);
  CHECK(report.edges_added == 1);
  CHECK(g.edges().count(EdgeKey{"rssd:1001", "HELD_BY", "rssd:2002"}) == 1);
  CHECK(g.edges().at(EdgeKey{"rssd:1001", "HELD_BY", "rssd:2002"}).count("NIC") == 1);
}

TEST_CASE("nic: missing parents are reported and skipped") {
  std::vector<ingest::InstitutionRecord> records(1);
  records[0].rssd_id = "1101";
  records[0].name = "Lost Branch";
  records[0].kind = ingest::InstitutionKind::BANK_BRANCH;
  records[0].parent_rssd_id = "9999";
  Graph g;
  auto report = g.ingest_nic(records, NicLinkColumns{});
  CHECK(report.nodes_added == 1);
  CHECK(report.edges_added == 0);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].find("DanglingParent") != std::string::npos);
  CHECK(report.diagnostics[0].find("9999") != std::string::npos);
}

TEST_CASE("nic: the bundled 12-row fixture matches the hand tally") {
  Graph g;
  auto report = g.ingest_nic(nic_fixture(), NicLinkColumns{});
  // 12 records; edges: 3 HELD_BY + 3 BRANCH_OF + 6 REGULATED_BY + 4 INSURED_BY.
  CHECK(report.nodes_added == 12);
  CHECK(report.edges_added == 16);
  REQUIRE(report.diagnostics.size() == 1);
  CHECK(report.diagnostics[0].find("DanglingParent") != std::string::npos);
  CHECK(g.check_integrity());
  // Idempotent.
  Graph before = g;
  auto again = g.ingest_nic(nic_fixture(), NicLinkColumns{});
  CHECK(again.nodes_added == 0);
  CHECK(again.edges_added == 0);
  CHECK(g == before);
}

TEST_CASE("one-hop queries match bound fields") {
  std::vector<ingest::InstitutionRecord> records(2);
  records[0].rssd_id = "1001";
  records[0].kind = ingest::InstitutionKind::BANK;
  records[0].parent_rssd_id = "2002";
  records[1].rssd_id = "2002";
  records[1].kind = ingest::InstitutionKind::HOLDING_COMPANY;
  Graph g;
  g.ingest_nic(records, NicLinkColumns{});
  auto bindings = query_pattern(g, Pattern::parse({"*", "HELD_BY", "rssd:2002"}));
  REQUIRE(bindings.size() == 1);
  CHECK(bindings[0] == std::vector<std::string>{"rssd:1001", "HELD_BY", "rssd:2002"});
}

TEST_CASE("wildcard query on an empty graph is empty") {
  Graph g;
  CHECK(query_pattern(g, Pattern::parse({"*", "*", "*"})).empty());
}

TEST_CASE("two-hop queries join on the middle node") {
  Graph g;
  g.merge_instance(sample_instance(), no_aliases());
  auto records = nic_fixture();
  g.ingest_nic(records, NicLinkColumns{});
  // event --authority--> federal reserve is slot data; join NIC hops instead:
  // bank --HELD_BY--> holding --REGULATED_BY--> regulator.
  auto bindings = query_pattern(g, Pattern::parse({"rssd:1001", "HELD_BY", "*", "REGULATED_BY", "*"}));
  REQUIRE(bindings.size() == 1);
  CHECK(bindings[0] ==
        std::vector<std::string>{"rssd:1001", "HELD_BY", "rssd:2001", "REGULATED_BY", "rssd:3001"});

  // Oracle: brute-force join over the edge list.
  std::vector<std::vector<std::string>> oracle;
  for (const auto& [e1, p1] : g.edges()) {
    for (const auto& [e2, p2] : g.edges()) {
      if (e1.to != e2.from) continue;
      if (e1.from != "rssd:1001" || e1.label != "HELD_BY" || e2.label != "REGULATED_BY") continue;
      oracle.push_back({e1.from, e1.label, e1.to, e2.label, e2.to});
    }
  }
  std::sort(oracle.begin(), oracle.end());
  CHECK(bindings == oracle);
}

TEST_CASE("unsupported two-hop patterns are rejected") {
  CHECK_THROWS_AS(Pattern::parse({"*", "*", "*", "REGULATED_BY", "x"}), Error);
  CHECK_THROWS_AS(Pattern::parse({"a", "l", "*", "*", "*"}), Error);
  CHECK_THROWS_AS(Pattern::parse({"a", "l"}), Error);
  CHECK_NOTHROW(Pattern::parse({"a", "l", "*", "l2", "*"}));
}

TEST_CASE("empty graph round-trips") {
  Graph g;
  CHECK(Graph::deserialize(g.serialize()) == g);
}

TEST_CASE("fixture graph round-trips through a file") {
  Graph g;
  g.ingest_nic(nic_fixture(), NicLinkColumns{});
  g.merge_instance(sample_instance(), no_aliases());
  auto path = std::filesystem::temp_directory_path() / "regwatch_graph_roundtrip.tsv";
  g.persist(path.string());
  Graph loaded = Graph::load(path.string());
  CHECK(loaded == g);
  std::filesystem::remove(path);
}

TEST_CASE("truncated graph files name the line") {
  Graph g;
  g.ingest_nic(nic_fixture(), NicLinkColumns{});
  std::string content = g.serialize();
  std::string truncated = content.substr(0, content.size() - 20);
  try {
    Graph::deserialize(truncated);
    FAIL("expected MalformedInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_input);
    CHECK(e.detail().find("line") != std::string::npos);
  }
}

TEST_CASE("edges before nodes are rejected") {
  CHECK_THROWS_AS(Graph::deserialize("E\ta\tl\tb\t[\"NIC\"]\n"), Error);
  CHECK_THROWS_AS(
      Graph::deserialize("N\ta\tbank\t{}\nE\ta\tl\tmissing\t[\"NIC\"]\n"), Error);
}

TEST_CASE("random graphs survive persist and load") {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 25; ++trial) {
    Graph g = random_graph(rng);
    CHECK(g.check_integrity());
    Graph back = Graph::deserialize(g.serialize());
    CHECK(back == g);
    CHECK(back.serialize() == g.serialize());
  }
}

TEST_CASE("queries agree with a brute-force edge scan") {
  std::mt19937 rng(8080);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = random_graph(rng);
    std::vector<std::string> keys;
    for (const auto& [key, _] : g.nodes()) keys.push_back(key);
    auto pick = [&](int wildcard_odds) -> std::string {
      if (static_cast<int>(rng() % 100) < wildcard_odds || keys.empty()) return "*";
      return keys[rng() % keys.size()];
    };
    auto pick_label = [&](int wildcard_odds) -> std::string {
      if (static_cast<int>(rng() % 100) < wildcard_odds) return "*";
      return "l" + std::to_string(rng() % 4);
    };

    // 1-hop: any field may be unbound.
    std::vector<std::string> fields = {pick(50), pick_label(50), pick(50)};
    auto bindings = query_pattern(g, Pattern::parse(fields));
    std::vector<std::vector<std::string>> oracle;
    auto matches = [](const std::string& p, const std::string& v) { return p == "*" || p == v; };
    for (const auto& [e, _] : g.edges()) {
      if (matches(fields[0], e.from) && matches(fields[1], e.label) && matches(fields[2], e.to)) {
        oracle.push_back({e.from, e.label, e.to});
      }
    }
    std::sort(oracle.begin(), oracle.end());
    oracle.erase(std::unique(oracle.begin(), oracle.end()), oracle.end());
    CHECK(bindings == oracle);

    // 2-hop with a bound start and labels, wildcard join and object.
    if (keys.empty()) continue;
    std::vector<std::string> two = {pick(0), pick_label(0), "*", pick_label(0), "*"};
    auto two_bindings = query_pattern(g, Pattern::parse(two));
    std::vector<std::vector<std::string>> two_oracle;
    for (const auto& [e1, p1] : g.edges()) {
      if (!matches(two[0], e1.from) || !matches(two[1], e1.label)) continue;
      for (const auto& [e2, p2] : g.edges()) {
        if (e2.from != e1.to || !matches(two[3], e2.label)) continue;
        two_oracle.push_back({e1.from, e1.label, e1.to, e2.label, e2.to});
      }
    }
    std::sort(two_oracle.begin(), two_oracle.end());
    two_oracle.erase(std::unique(two_oracle.begin(), two_oracle.end()), two_oracle.end());
    CHECK(two_bindings == two_oracle);
  }
}
