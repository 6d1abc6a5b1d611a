// Acceptance suite: one line per criterion, nonzero exit on any failure.
// argv[1] is the path to the regwatch CLI binary.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "regwatch/config.hpp"
#include "regwatch/errors.hpp"
#include "regwatch/kgraph.hpp"
#include "regwatch/notify.hpp"
#include "regwatch/textfile.hpp"

namespace fs = std::filesystem;
using namespace regwatch;

namespace {

const std::string kFixtures = REGWATCH_FIXTURE_DIR;
const std::string kData = REGWATCH_DATA_DIR;

std::string g_cli;
fs::path g_work;
int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS " : "FAIL ") << name;
  if (!ok && !detail.empty()) std::cout << " — " << detail;
  std::cout << "\n";
  if (!ok) ++g_failures;
}

void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
    report(name, true);
  } catch (const std::exception& e) {
    report(name, false, e.what());
  }
}

void require(bool condition, const std::string& what) {
  if (!condition) throw std::runtime_error(what);
}

int run(const std::string& command) {
  return std::system(command.c_str());
}

std::vector<fs::path> sorted_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return read_file(a.string()) == read_file(b.string());
}

bool dirs_equal(const fs::path& a, const fs::path& b) {
  auto fa = sorted_dir(a);
  auto fb = sorted_dir(b);
  if (fa.size() != fb.size()) return false;
  for (size_t i = 0; i < fa.size(); ++i) {
    if (fa[i].filename() != fb[i].filename()) return false;
    if (!same_bytes(fa[i], fb[i])) return false;
  }
  return true;
}

// ---- criterion 1: golden corpus, byte-identical, < 5 s ----

void golden_corpus() {
  auto started = std::chrono::steady_clock::now();
  AppConfig config = load_app_config(kData + "/config.json");
  size_t compared = 0;
  for (const auto& file : sorted_dir(kFixtures + "/golden_articles")) {
    auto article = ingest::parse_article(read_file(file.string()));
    auto result = fuse::run_pipeline(article, config.pipeline);
    std::string produced = fuse::instance_to_json(result.instance) + "\n";
    std::string gold = read_file(kFixtures + "/gold/" + article.id + ".instance.json");
    require(produced == gold, "instance differs from gold for " + article.id);
    ++compared;
  }
  require(compared == 10, "expected 10 golden articles");

  // The CLI surface must produce the same bytes.
  fs::path out = g_work / "c1_instances";
  require(run(g_cli + " --config " + kData + "/config.json extract --articles " + kFixtures +
              "/golden_articles --out " + out.string() + " > /dev/null 2>&1") == 0,
          "extract command failed");
  require(dirs_equal(out, kFixtures + "/gold"), "CLI output differs from gold");

  auto elapsed = std::chrono::steady_clock::now() - started;
  require(elapsed < std::chrono::seconds(5), "golden corpus run exceeded 5 seconds");
}

// ---- criterion 2: intersection filter vs brute-force oracle ----

void intersection_oracle() {
  std::mt19937 rng(20240515);
  auto make = [&](size_t n, extract::Stream stream) {
    std::vector<extract::EntityMention> out;
    for (size_t i = 0; i < n; ++i) {
      extract::EntityMention m;
      size_t start = rng() % 80;
      m.span = text::Span{start, start + 1 + rng() % 14};
      m.sentence_index = rng() % 3;
      m.entity_type = stream == extract::Stream::CUSTOM ? extract::EntityType::REGULATED_ENTITY
                                                        : extract::EntityType::UNTYPED;
      m.stream = stream;
      m.surface = "x";
      out.push_back(m);
    }
    return out;
  };
  const std::vector<Rational> thresholds = {Rational(1, 10), Rational(1, 4), Rational(1, 2),
                                            Rational(3, 4), Rational(9, 10), Rational(1, 1)};
  for (int trial = 0; trial < 500; ++trial) {
    auto custom = make(rng() % 10, extract::Stream::CUSTOM);
    auto srl = make(rng() % 10, extract::Stream::SRL);
    size_t previous = SIZE_MAX;
    for (const auto& threshold : thresholds) {
      auto kept = fuse::intersect_entities(custom, srl, threshold);
      size_t oracle = 0;
      for (const auto& c : custom) {
        bool survives = false;
        for (const auto& s : srl) {
          if (s.sentence_index != c.sentence_index) continue;
          long long lo = std::max(c.span.start, s.span.start);
          long long hi = std::min(c.span.end, s.span.end);
          if (hi <= lo) continue;
          long long inter = hi - lo;
          long long uni = static_cast<long long>(c.span.length() + s.span.length()) - inter;
          if (Rational(inter, uni) >= threshold) survives = true;
        }
        if (survives) ++oracle;
      }
      require(kept.size() == oracle, "intersection disagrees with oracle");
      require(kept.size() <= previous, "monotonicity violated");
      previous = kept.size();
    }
  }
}

// ---- criterion 3: pair enumeration counts 0..50 ----

void pair_counts() {
  std::mt19937 rng(7);
  for (size_t n = 0; n <= 50; ++n) {
    std::vector<extract::EntityMention> entities;
    size_t offset = 0;
    for (size_t i = 0; i < n; ++i) {
      extract::EntityMention m;
      offset += 1 + rng() % 5;
      m.span = text::Span{offset, offset + 1 + rng() % 4};
      offset = m.span.end;
      m.surface = "e" + std::to_string(i);
      entities.push_back(m);
    }
    auto pairs = relate::enumerate_pairs(entities);
    size_t oracle = 0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) ++oracle;
    }
    require(pairs.size() == oracle, "pair count disagrees with nested-loop oracle");
    require(pairs.size() == n * (n - 1) / 2, "pair count formula violated");
  }
}

// ---- criterion 4: Wu-Palmer properties and worked values ----

void wup_properties() {
  std::mt19937 rng(90210);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng() % 99;
    std::vector<std::string> lines = {"t0\tt0"};
    for (size_t i = 1; i < n; ++i) {
      lines.push_back("t" + std::to_string(i) + "\tt" + std::to_string(rng() % i));
    }
    auto tax = notify::Taxonomy::from_lines(lines);
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
    for (int probe = 0; probe < 20; ++probe) {
      std::string a = "t" + std::to_string(rng() % n);
      std::string b = "t" + std::to_string(rng() % n);
      Rational ab = notify::wup_similarity(tax, a, b);
      require(ab == notify::wup_similarity(tax, b, a), "wup not symmetric");
      require(ab > Rational(0, 1), "wup not positive");
      require((ab == Rational(1, 1)) == (a == b), "wup identity violated");
      int deepest = 0;
      for (const auto& x : path_of(a)) {
        for (const auto& y : path_of(b)) {
          if (x == y) deepest = std::max(deepest, tax.depth(x));
        }
      }
      require(ab == Rational(2LL * deepest, tax.depth(a) + tax.depth(b)),
              "wup disagrees with ancestor-path oracle");
    }
  }
  auto four = notify::Taxonomy::from_lines(
      {"entity\tentity", "institution\tentity", "bank\tinstitution", "regulator\tinstitution"});
  require(notify::wup_similarity(four, "bank", "regulator") == Rational(2, 3),
          "worked value 2/3 does not reproduce");
  require(notify::wup_similarity(four, "entity", "bank") == Rational(1, 2),
          "worked value 1/2 does not reproduce");
}

// ---- criterion 5: graph idempotence, integrity, persistence ----

void graph_idempotence() {
  AppConfig config = load_app_config(kData + "/config.json");
  auto merge_all = [&](kg::Graph& graph) {
    for (const auto& file : sorted_dir(kFixtures + "/gold")) {
      auto instance = fuse::instance_from_json(read_file(file.string()));
      graph.merge_instance(instance, config.aliases);
      require(graph.check_integrity(), "integrity broken after merge");
    }
  };
  kg::Graph graph;
  auto records = ingest::parse_nic_csv(read_file(kData + "/nic_sample.csv"), config.nic_kinds);
  graph.ingest_nic(records, config.nic_links);
  require(graph.check_integrity(), "integrity broken after NIC ingest");
  merge_all(graph);
  std::string once = graph.serialize();
  merge_all(graph);
  std::string twice = graph.serialize();
  require(once == twice, "second merge changed the graph file");

  std::mt19937 rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    kg::Graph g;
    kg::MergeReport scratch;
    size_t nodes = 1 + rng() % 15;
    std::vector<std::string> keys;
    for (size_t i = 0; i < nodes; ++i) {
      std::string key = "n" + std::to_string(rng() % 50);
      g.add_node(key, (rng() % 2) ? "bank" : "untyped");
      if (rng() % 3 == 0) g.set_property(key, "p" + std::to_string(rng() % 3), "v");
      if (rng() % 4 == 0) g.add_surface_form(key, "Surface " + std::to_string(rng() % 6));
      keys.push_back(key);
    }
    for (size_t i = 0, edges = rng() % 25; i < edges; ++i) {
      g.add_edge(keys[rng() % keys.size()], "l" + std::to_string(rng() % 4),
                 keys[rng() % keys.size()], "a" + std::to_string(rng() % 5), scratch);
    }
    require(g.check_integrity(), "random graph integrity");
    kg::Graph back = kg::Graph::deserialize(g.serialize());
    require(back == g, "persist/load round trip changed the graph");
  }
}

// ---- criterion 6: NIC fixture hand tally ----

void nic_tally() {
  AppConfig config = load_app_config(kData + "/config.json");
  auto records = ingest::parse_nic_csv(read_file(kData + "/nic_sample.csv"), config.nic_kinds);
  require(records.size() == 12, "fixture must have 12 rows");
  kg::Graph graph;
  auto report = graph.ingest_nic(records, config.nic_links);
  // Hand tally: 12 nodes; 3 HELD_BY + 3 BRANCH_OF + 6 REGULATED_BY + 4 INSURED_BY.
  require(report.nodes_added == 12, "node count != 12");
  require(report.edges_added == 16, "edge count != 16");
  require(report.diagnostics.size() == 1, "expected exactly one diagnostic");
  require(report.diagnostics[0].find("DanglingParent") != std::string::npos,
          "missing DanglingParent diagnostic");
}

// ---- criterion 7: summarization ratios ----

void summarization() {
  AppConfig config = load_app_config(kData + "/config.json");
  auto frozen = nlohmann::json::parse(read_file(kFixtures + "/gold_ratios.json"));
  Rational sum;
  long long count = 0;
  for (const auto& file : sorted_dir(kFixtures + "/golden_articles")) {
    auto article = ingest::parse_article(read_file(file.string()));
    auto result = fuse::run_pipeline(article, config.pipeline);
    std::string expected = frozen.at(article.id).get<std::string>();
    require(result.ratio.to_string() == expected,
            "ratio for " + article.id + " is " + result.ratio.to_string() + ", frozen " + expected);
    sum = sum + result.ratio;
    ++count;
  }
  require(count == 10, "expected 10 ratios");
  require(sum / count > Rational(1, 1), "mean ratio not > 1");
}

// ---- criterion 8: notification correctness ----

void notifications() {
  auto subscriptions = notify::parse_rules(read_file(kFixtures + "/subscriptions.rules"));
  auto taxonomy = notify::Taxonomy::load(kData + "/taxonomy.tsv");
  std::vector<notify::Alert> alerts;
  for (const auto& file : sorted_dir(kFixtures + "/gold")) {
    auto instance = fuse::instance_from_json(read_file(file.string()));
    auto found = notify::generate_alerts(instance, subscriptions, taxonomy);
    alerts.insert(alerts.end(), found.begin(), found.end());
  }
  std::sort(alerts.begin(), alerts.end(), [](const notify::Alert& a, const notify::Alert& b) {
    if (a.subscriber_id != b.subscriber_id) return a.subscriber_id < b.subscriber_id;
    return a.article_id < b.article_id;
  });
  std::string produced;
  for (const auto& alert : alerts) produced += notify::alert_to_json(alert) + "\n";
  require(produced == read_file(kFixtures + "/gold_alerts.jsonl"),
          "alert set differs from hand evaluation");

  auto four = notify::Taxonomy::from_lines(
      {"entity\tentity", "institution\tentity", "bank\tinstitution", "regulator\tinstitution"});
  require(notify::semantic_score({"bank"}, {"bank"}, four).value == Rational(1, 1),
          "worked value 1.0 does not reproduce");
  require(notify::semantic_score({"bank"}, {"regulator"}, four).value == Rational(2, 3),
          "worked value 2/3 does not reproduce");
  require(notify::semantic_score({"bank", "regulator"}, {"bank"}, four).value == Rational(5, 6),
          "worked value 5/6 does not reproduce");
}

// ---- criterion 9: CLI determinism ----

void cli_determinism() {
  std::string config = " --config " + kData + "/config.json ";
  auto shell = [&](const std::string& command) {
    require(run(command + " > /dev/null 2>&1") == 0, "command failed: " + command);
  };

  for (int round = 1; round <= 2; ++round) {
    fs::path base = g_work / ("round" + std::to_string(round));
    fs::create_directories(base);
    shell(g_cli + config + "ingest --source " + kFixtures + "/golden_articles --since 2020-01-01 --out " +
          (base / "articles").string());
    shell(g_cli + config + "extract --articles " + (base / "articles").string() + " --out " +
          (base / "instances").string());
    shell(g_cli + config + "graph build --nic " + kData + "/nic_sample.csv --graph " +
          (base / "graph.tsv").string());
    shell(g_cli + config + "graph merge --graph " + (base / "graph.tsv").string() +
          " --instances " + (base / "instances").string());
    shell(g_cli + config + "graph query --graph " + (base / "graph.tsv").string() +
          " '*' HELD_BY rssd:2001 > " + (base / "query.txt").string() + " 2>/dev/null");
    shell(g_cli + config + "notify --instances " + (base / "instances").string() + " --rules " +
          kFixtures + "/subscriptions.rules --taxonomy " + kData + "/taxonomy.tsv --out " +
          (base / "alerts.jsonl").string());
  }
  fs::path r1 = g_work / "round1";
  fs::path r2 = g_work / "round2";
  require(dirs_equal(r1 / "articles", r2 / "articles"), "ingest outputs differ");
  require(dirs_equal(r1 / "instances", r2 / "instances"), "extract outputs differ");
  require(same_bytes(r1 / "graph.tsv", r2 / "graph.tsv"), "graph files differ");
  require(same_bytes(r1 / "query.txt", r2 / "query.txt"), "query outputs differ");
  require(same_bytes(r1 / "alerts.jsonl", r2 / "alerts.jsonl"), "alert files differ");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-regwatch-cli>\n";
    return 2;
  }
  g_cli = argv[1];
  g_work = fs::temp_directory_path() / "regwatch_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  criterion("criterion-1 golden corpus byte-identical, < 5 s", golden_corpus);
  criterion("criterion-2 intersection filter vs oracle, monotone", intersection_oracle);
  criterion("criterion-3 pair enumeration n(n-1)/2 for 0..50", pair_counts);
  criterion("criterion-4 Wu-Palmer properties and worked values", wup_properties);
  criterion("criterion-5 graph idempotence, integrity, round trips", graph_idempotence);
  criterion("criterion-6 NIC fixture hand tally with DanglingParent", nic_tally);
  criterion("criterion-7 summarization ratios frozen, mean > 1", summarization);
  criterion("criterion-8 notifications match hand evaluation", notifications);
  criterion("criterion-9 CLI determinism across runs", cli_determinism);

  if (g_failures != 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
