#include <algorithm>
#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "regwatch/config.hpp"
#include "regwatch/errors.hpp"
#include "regwatch/kgraph.hpp"
#include "regwatch/notify.hpp"
#include "regwatch/textfile.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regwatch;

namespace {

struct RunReport {
  size_t articles_processed = 0;
  size_t instances_written = 0;
  Rational mean_summarization_ratio;
  size_t alerts_emitted = 0;
  std::vector<std::string> diagnostics;
};

bool g_quiet = false;

void print_report(const RunReport& report) {
  json j;
  j["articles_processed"] = report.articles_processed;
  j["instances_written"] = report.instances_written;
  j["mean_summarization_ratio"] = report.mean_summarization_ratio.to_string();
  j["alerts_emitted"] = report.alerts_emitted;
  j["diagnostics"] = report.diagnostics;
  std::cout << j.dump() << "\n";
  if (!g_quiet) {
    for (const auto& d : report.diagnostics) std::cerr << d << "\n";
  }
}

void print_merge_report(const kg::MergeReport& report) {
  json j;
  j["nodes_added"] = report.nodes_added;
  j["edges_added"] = report.edges_added;
  j["edges_deduplicated"] = report.edges_deduplicated;
  j["diagnostics"] = report.diagnostics;
  std::cout << j.dump() << "\n";
  if (!g_quiet) {
    for (const auto& d : report.diagnostics) std::cerr << d << "\n";
  }
}

std::string safe_filename(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (c == '/' || c == '\\' || c == '\0') c = '_';
  }
  return out;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::source_unavailable, "not a directory: " + dir.string());
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Date parse_since(const std::string& raw) {
  auto date = Date::parse_iso(raw);
  if (!date) throw Error(ErrorCode::config_error, "--since must be YYYY-MM-DD, got " + raw);
  return *date;
}

int cmd_ingest(const std::string& source, const std::string& since_raw, const std::string& out_dir) {
  Date since = parse_since(since_raw);
  auto result = ingest::fetch_updates(source, since);
  fs::create_directories(out_dir);

  RunReport report;
  report.diagnostics = result.skipped;
  for (const auto& article : result.articles) {
    fs::path path = fs::path(out_dir) / (safe_filename(article.id) + ".json");
    write_file_atomic(path.string(), ingest::article_to_json(article) + "\n");
    ++report.articles_processed;
  }
  print_report(report);
  return 0;
}

struct ExtractOutcome {
  std::string instance_json;
  Rational ratio;
  std::vector<std::string> diagnostics;
  bool ok = false;
};

ExtractOutcome extract_one(const fs::path& file, const AppConfig& config,
                           const std::string& annotations_dir) {
  ExtractOutcome out;
  try {
    ingest::Article article = ingest::parse_article(read_file(file.string()));
    extract::ExternalAnnotations annotations;
    const extract::ExternalAnnotations* annotations_ptr = nullptr;
    if (!annotations_dir.empty()) {
      fs::path annotation_file =
          fs::path(annotations_dir) / (safe_filename(article.id) + ".annotations.json");
      if (fs::exists(annotation_file)) {
        auto sentences = text::segment_sentences(article.body_text, config.pipeline.abbreviations);
        annotations = extract::load_external_annotations(read_file(annotation_file.string()),
                                                         article, sentences);
        annotations_ptr = &annotations;
      }
    }
    auto result = fuse::run_pipeline(article, config.pipeline, annotations_ptr);
    out.instance_json = fuse::instance_to_json(result.instance) + "\n";
    out.ratio = result.ratio;
    out.ok = true;
  } catch (const Error& e) {
    out.diagnostics.push_back(file.filename().string() + ": " + e.what());
  }
  return out;
}

int cmd_extract(const std::string& articles_dir, const std::string& out_dir,
                const std::string& annotations_dir, const AppConfig& config, unsigned jobs) {
  auto files = sorted_files(articles_dir, ".json");
  fs::create_directories(out_dir);

  std::vector<ExtractOutcome> outcomes(files.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < files.size(); ++i) {
      outcomes[i] = extract_one(files[i], config, annotations_dir);
    }
  } else {
    // Articles are independent; compute in parallel, write back in order.
    std::atomic<size_t> next{0};
    auto worker = [&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= files.size()) return;
        outcomes[i] = extract_one(files[i], config, annotations_dir);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunReport report;
  Rational sum;
  for (size_t i = 0; i < files.size(); ++i) {
    const auto& outcome = outcomes[i];
    for (const auto& d : outcome.diagnostics) report.diagnostics.push_back(d);
    if (!outcome.ok) continue;
    std::string name = files[i].stem().string() + ".instance.json";
    write_file_atomic((fs::path(out_dir) / name).string(), outcome.instance_json);
    sum = sum + outcome.ratio;
    ++report.articles_processed;
    ++report.instances_written;
  }
  if (report.articles_processed > 0) {
    report.mean_summarization_ratio = sum / static_cast<long long>(report.articles_processed);
  }
  print_report(report);
  return 0;
}

int cmd_graph_build(const std::string& nic_csv, const std::string& graph_file,
                    const AppConfig& config) {
  auto records = ingest::parse_nic_csv(read_file(nic_csv), config.nic_kinds);
  kg::Graph graph;
  kg::MergeReport report = graph.ingest_nic(records, config.nic_links);
  graph.persist(graph_file);
  print_merge_report(report);
  return 0;
}

int cmd_graph_merge(const std::string& graph_file, const std::string& instances_dir,
                    bool create, const AppConfig& config) {
  kg::Graph graph;
  if (fs::exists(graph_file)) {
    graph = kg::Graph::load(graph_file);
  } else if (!create) {
    throw Error(ErrorCode::source_unavailable, "graph file missing (use --create): " + graph_file);
  }

  kg::MergeReport total;
  for (const auto& file : sorted_files(instances_dir, ".instance.json")) {
    auto instance = fuse::instance_from_json(read_file(file.string()));
    kg::MergeReport report = graph.merge_instance(instance, config.aliases);
    total.nodes_added += report.nodes_added;
    total.edges_added += report.edges_added;
    total.edges_deduplicated += report.edges_deduplicated;
    for (auto& d : report.diagnostics) total.diagnostics.push_back(std::move(d));
  }
  graph.persist(graph_file);
  print_merge_report(total);
  return 0;
}

int cmd_graph_query(const std::string& graph_file, const std::vector<std::string>& pattern_fields) {
  kg::Graph graph = kg::Graph::load(graph_file);
  kg::Pattern pattern = kg::Pattern::parse(pattern_fields);
  for (const auto& binding : kg::query_pattern(graph, pattern)) {
    std::string line;
    for (size_t i = 0; i < binding.size(); ++i) {
      if (i) line += '\t';
      line += binding[i];
    }
    std::cout << line << "\n";
  }
  return 0;
}

int cmd_notify(const std::string& instances_dir, const std::string& rules_file,
               const std::string& taxonomy_file, const std::string& out_file) {
  auto subscriptions = notify::parse_rules(read_file(rules_file));
  auto taxonomy = notify::Taxonomy::load(taxonomy_file);

  RunReport report;
  std::vector<notify::Alert> alerts;
  for (const auto& file : sorted_files(instances_dir, ".instance.json")) {
    auto instance = fuse::instance_from_json(read_file(file.string()));
    auto generated = notify::generate_alerts(instance, subscriptions, taxonomy);
    alerts.insert(alerts.end(), generated.begin(), generated.end());
    ++report.articles_processed;
  }
  std::sort(alerts.begin(), alerts.end(), [](const notify::Alert& a, const notify::Alert& b) {
    if (a.subscriber_id != b.subscriber_id) return a.subscriber_id < b.subscriber_id;
    return a.article_id < b.article_id;
  });

  std::string lines;
  for (const auto& alert : alerts) lines += notify::alert_to_json(alert) + "\n";
  write_file_atomic(out_file, lines);
  report.alerts_emitted = alerts.size();
  print_report(report);
  return 0;
}

int cmd_watch(const std::string& source, const std::string& since_raw, const std::string& workdir,
              const std::string& rules_file, const std::string& taxonomy_file,
              unsigned interval_seconds, unsigned iterations, const AppConfig& config,
              unsigned jobs) {
  Date since = parse_since(since_raw);
  fs::path articles_dir = fs::path(workdir) / "articles";
  fs::path instances_dir = fs::path(workdir) / "instances";
  fs::create_directories(articles_dir);
  fs::create_directories(instances_dir);

  for (unsigned i = 0; iterations == 0 || i < iterations; ++i) {
    if (i > 0) std::this_thread::sleep_for(std::chrono::seconds(interval_seconds));
    auto fetched = ingest::fetch_updates(source, since);
    for (const auto& article : fetched.articles) {
      fs::path path = articles_dir / (safe_filename(article.id) + ".json");
      write_file_atomic(path.string(), ingest::article_to_json(article) + "\n");
    }
    cmd_extract(articles_dir.string(), instances_dir.string(), "", config, jobs);
    if (!rules_file.empty() && !taxonomy_file.empty()) {
      cmd_notify(instances_dir.string(), rules_file, taxonomy_file,
                 (fs::path(workdir) / "alerts.jsonl").string());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regwatch: regulatory threshold-change monitoring pipeline"};
  app.require_subcommand(1);

  std::string config_path = "data/config.json";
  unsigned jobs = 1;
  app.add_option("--config", config_path, "Path to the JSON config file");
  app.add_flag("--quiet", g_quiet, "Suppress diagnostics on stderr");
  app.add_option("--jobs", jobs, "Worker threads for batch extraction")->check(CLI::Range(1u, 64u));

  auto* ingest_cmd = app.add_subcommand("ingest", "Fetch articles into a directory");
  std::string source, since = "0001-01-01", out_dir;
  ingest_cmd->add_option("--source", source, "Fixture directory or http:// URL")->required();
  ingest_cmd->add_option("--since", since, "Earliest publication date (YYYY-MM-DD)");
  ingest_cmd->add_option("--out", out_dir, "Output directory for article JSON")->required();

  auto* extract_cmd = app.add_subcommand("extract", "Run the pipeline over a directory of articles");
  std::string articles_dir, instances_out, annotations_dir;
  extract_cmd->add_option("--articles", articles_dir, "Directory of article JSON files")->required();
  extract_cmd->add_option("--out", instances_out, "Output directory for instances")->required();
  extract_cmd->add_option("--annotations", annotations_dir,
                          "Directory of <id>.annotations.json files from external models");

  auto* graph_cmd = app.add_subcommand("graph", "Knowledge graph operations");
  graph_cmd->require_subcommand(1);
  auto* build_cmd = graph_cmd->add_subcommand("build", "Create a graph from a NIC CSV");
  std::string nic_csv, graph_file;
  build_cmd->add_option("--nic", nic_csv, "NIC CSV file")->required();
  build_cmd->add_option("--graph", graph_file, "Graph file to write")->required();
  auto* merge_cmd = graph_cmd->add_subcommand("merge", "Merge instance files into a graph");
  std::string merge_graph, merge_instances;
  bool merge_create = false;
  merge_cmd->add_option("--graph", merge_graph, "Graph file to update")->required();
  merge_cmd->add_option("--instances", merge_instances, "Directory of instance files")->required();
  merge_cmd->add_flag("--create", merge_create, "Start from an empty graph if the file is missing");
  auto* query_cmd = graph_cmd->add_subcommand("query", "Match a 1- or 2-hop pattern");
  std::string query_graph;
  std::vector<std::string> pattern_fields;
  query_cmd->add_option("--graph", query_graph, "Graph file to read")->required();
  query_cmd->add_option("pattern", pattern_fields,
                        "3 fields (subject label object) or 5 (s l m l o); '*' is a wildcard")
      ->expected(3, 5);

  auto* notify_cmd = app.add_subcommand("notify", "Evaluate subscriptions over instances");
  std::string notify_instances, rules_file, taxonomy_file, alerts_out;
  notify_cmd->add_option("--instances", notify_instances, "Directory of instance files")->required();
  notify_cmd->add_option("--rules", rules_file, "Subscription rules file")->required();
  notify_cmd->add_option("--taxonomy", taxonomy_file, "Taxonomy file")->required();
  notify_cmd->add_option("--out", alerts_out, "Alerts JSONL output")->required();

  auto* watch_cmd = app.add_subcommand("watch", "Poll a source and run the pipeline on updates");
  std::string watch_source, watch_since = "0001-01-01", watch_workdir;
  std::string watch_rules, watch_taxonomy;
  unsigned interval_seconds = 60, iterations = 0;
  watch_cmd->add_option("--source", watch_source, "Fixture directory or http:// URL")->required();
  watch_cmd->add_option("--since", watch_since, "Earliest publication date");
  watch_cmd->add_option("--workdir", watch_workdir, "Working directory for outputs")->required();
  watch_cmd->add_option("--rules", watch_rules, "Optional subscription rules file");
  watch_cmd->add_option("--taxonomy", watch_taxonomy, "Taxonomy file (required with --rules)");
  watch_cmd->add_option("--interval", interval_seconds, "Seconds between polls");
  watch_cmd->add_option("--iterations", iterations, "Poll count; 0 runs forever");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) return cmd_ingest(source, since, out_dir);
    if (extract_cmd->parsed()) {
      AppConfig config = load_app_config(config_path);
      return cmd_extract(articles_dir, instances_out, annotations_dir, config, jobs);
    }
    if (graph_cmd->parsed()) {
      AppConfig config = load_app_config(config_path);
      if (build_cmd->parsed()) return cmd_graph_build(nic_csv, graph_file, config);
      if (merge_cmd->parsed()) return cmd_graph_merge(merge_graph, merge_instances, merge_create, config);
      if (query_cmd->parsed()) return cmd_graph_query(query_graph, pattern_fields);
    }
    if (notify_cmd->parsed()) {
      return cmd_notify(notify_instances, rules_file, taxonomy_file, alerts_out);
    }
    if (watch_cmd->parsed()) {
      AppConfig config = load_app_config(config_path);
      return cmd_watch(watch_source, watch_since, watch_workdir, watch_rules, watch_taxonomy,
                       interval_seconds, iterations, config, jobs);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
