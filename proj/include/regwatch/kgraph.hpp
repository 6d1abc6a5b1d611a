#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "regwatch/fuse.hpp"
#include "regwatch/ingest.hpp"

namespace regwatch::kg {

// Case-fold, collapse internal whitespace, strip leading articles
// {the, a, an}, then apply the alias map once. Throws EmptySurface when
// nothing remains.
class AliasMap {
 public:
  static AliasMap load(const std::string& path);
  static AliasMap from_lines(const std::vector<std::string>& lines);
  const std::string* resolve(const std::string& canonical_surface) const;

 private:
  std::map<std::string, std::string> aliases_;
};

std::string canonicalize(std::string_view surface, const AliasMap& aliases);

struct Node {
  std::string key;
  std::string label;  // entity type, institution kind, "event", or "untyped"
  std::map<std::string, std::string> properties;

  bool operator==(const Node&) const = default;
};

struct EdgeKey {
  std::string from;
  std::string label;
  std::string to;

  auto operator<=>(const EdgeKey&) const = default;
};

struct MergeReport {
  size_t nodes_added = 0;
  size_t edges_added = 0;
  size_t edges_deduplicated = 0;  // insert attempts that hit an existing edge
  std::vector<std::string> diagnostics;
};

// Which NIC columns carry regulator / insurer RSSD ids (the registry does
// not pin these, so they are configuration).
struct NicLinkColumns {
  std::vector<std::string> regulator_columns = {"REGULATOR_RSSD"};
  std::vector<std::string> insurer_columns = {"INSURER_RSSD"};
};

// Single-writer node/edge store. (from, label, to) is unique; re-insertion
// merges provenance. Readers take value snapshots between mutations.
class Graph {
 public:
  bool add_node(const std::string& key, const std::string& label);
  void add_surface_form(const std::string& key, const std::string& surface);
  void set_property(const std::string& key, const std::string& name, const std::string& value);
  // Endpoints must exist. Returns true when the edge is new.
  bool add_edge(const std::string& from, const std::string& label, const std::string& to,
                const std::string& provenance, MergeReport& report);

  // Reifies the instance: one event node per article, slot-labeled edges to
  // typed slot nodes, one edge per relation triple. Idempotent.
  MergeReport merge_instance(const fuse::DataModelInstance& instance, const AliasMap& aliases);

  // "rssd:<id>" nodes with BRANCH_OF / HELD_BY / REGULATED_BY / INSURED_BY
  // edges; missing parents are reported as DanglingParent diagnostics and the
  // edge is skipped. Idempotent.
  MergeReport ingest_nic(const std::vector<ingest::InstitutionRecord>& records,
                         const NicLinkColumns& links);

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::map<EdgeKey, std::set<std::string>>& edges() const { return edges_; }

  bool check_integrity() const;  // every edge endpoint resolves to a node
  bool operator==(const Graph&) const = default;

  // UTF-8 lines: N<TAB>key<TAB>label<TAB>props-json then
  // E<TAB>from<TAB>label<TAB>to<TAB>prov-json, nodes before edges, sorted.
  std::string serialize() const;
  static Graph deserialize(const std::string& content);
  void persist(const std::string& path) const;
  static Graph load(const std::string& path);

 private:
  std::map<std::string, Node> nodes_;
  std::map<EdgeKey, std::set<std::string>> edges_;
};

// A query pattern is 3 fields (one hop) or 5 fields (two hops joined on the
// middle node); "*" is the wildcard. Two-hop patterns allow at most one
// wildcard per hop outside the join position.
struct Pattern {
  std::vector<std::string> fields;  // size 3 or 5

  static Pattern parse(const std::vector<std::string>& tokens);
};

// Bindings are fully concrete field tuples, sorted, duplicates removed.
std::vector<std::vector<std::string>> query_pattern(const Graph& graph, const Pattern& pattern);

}  // namespace regwatch::kg
