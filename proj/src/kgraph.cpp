#include "regwatch/kgraph.hpp"

#include <algorithm>

#include <json.hpp>

#include "regwatch/errors.hpp"
#include "regwatch/textfile.hpp"

namespace regwatch::kg {

using nlohmann::json;

AliasMap AliasMap::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

AliasMap AliasMap::from_lines(const std::vector<std::string>& lines) {
  AliasMap out;
  AliasMap empty;
  for (const auto& line : lines) {
    auto parts = split(line, '\t');
    if (parts.size() != 2) {
      throw Error(ErrorCode::malformed_input, "alias entry needs alias<TAB>canonical: " + line);
    }
    // Keys and values live in canonical space so lookup happens post-fold.
    out.aliases_[canonicalize(parts[0], empty)] = canonicalize(parts[1], empty);
  }
  return out;
}

const std::string* AliasMap::resolve(const std::string& canonical_surface) const {
  auto it = aliases_.find(canonical_surface);
  if (it == aliases_.end()) return nullptr;
  return &it->second;
}

std::string canonicalize(std::string_view surface, const AliasMap& aliases) {
  std::string folded = text::normalize_whitespace(to_lower(surface));
  if (folded.empty()) throw Error(ErrorCode::empty_surface, "blank surface");

  // Strip leading articles while content words remain.
  while (true) {
    size_t space = folded.find(' ');
    if (space == std::string::npos) break;
    std::string first = folded.substr(0, space);
    if (first != "the" && first != "a" && first != "an") break;
    folded = folded.substr(space + 1);
  }
  if (folded == "the" || folded == "a" || folded == "an") {
    throw Error(ErrorCode::empty_surface, "surface has no content words: " + std::string(surface));
  }
  if (const std::string* mapped = aliases.resolve(folded)) return *mapped;
  return folded;
}

bool Graph::add_node(const std::string& key, const std::string& label) {
  if (key.empty()) throw Error(ErrorCode::malformed_input, "empty node key");
  auto [it, inserted] = nodes_.try_emplace(key);
  if (inserted) {
    it->second.key = key;
    it->second.label = label;
    return true;
  }
  // First concrete label wins; untyped upgrades to a concrete label.
  if (it->second.label == "untyped" && label != "untyped") it->second.label = label;
  return false;
}

void Graph::add_surface_form(const std::string& key, const std::string& surface) {
  auto it = nodes_.find(key);
  if (it == nodes_.end()) return;
  std::string& forms = it->second.properties["surface_forms"];
  std::set<std::string> parts;
  for (const auto& p : split(forms, '|')) {
    if (!p.empty()) parts.insert(p);
  }
  parts.insert(surface);
  forms.clear();
  for (const auto& p : parts) {
    if (!forms.empty()) forms += '|';
    forms += p;
  }
}

void Graph::set_property(const std::string& key, const std::string& name, const std::string& value) {
  auto it = nodes_.find(key);
  if (it != nodes_.end()) it->second.properties[name] = value;
}

bool Graph::add_edge(const std::string& from, const std::string& label, const std::string& to,
                     const std::string& provenance, MergeReport& report) {
  if (!nodes_.count(from) || !nodes_.count(to)) {
    throw Error(ErrorCode::storage_failure, "edge endpoint missing: " + from + " -> " + to);
  }
  EdgeKey key{from, label, to};
  auto [it, inserted] = edges_.try_emplace(std::move(key));
  it->second.insert(provenance);
  if (inserted) {
    ++report.edges_added;
  } else {
    ++report.edges_deduplicated;
  }
  return inserted;
}

namespace {

struct SlotValue {
  std::string edge_label;
  std::string node_key;
  std::string node_label;
  std::string surface;  // empty when no surface form applies
};

}  // namespace

MergeReport Graph::merge_instance(const fuse::DataModelInstance& instance, const AliasMap& aliases) {
  MergeReport report;
  const std::string& event_key = instance.article_id;
  if (event_key.empty()) throw Error(ErrorCode::malformed_input, "instance without article_id");
  if (add_node(event_key, "event")) ++report.nodes_added;
  set_property(event_key, "article_id", instance.article_id);

  auto canonical = [&](const std::string& surface) -> std::optional<std::string> {
    try {
      return canonicalize(surface, aliases);
    } catch (const Error& e) {
      report.diagnostics.push_back(std::string("skipped surface: ") + e.what());
      return std::nullopt;
    }
  };

  std::vector<SlotValue> slots;
  if (instance.authority) {
    if (auto key = canonical(*instance.authority)) {
      slots.push_back({"authority", *key, "regulatory_authority", *instance.authority});
    }
  }
  if (instance.regulated_entity) {
    if (auto key = canonical(*instance.regulated_entity)) {
      slots.push_back({"regulated_entity", *key, "regulated_entity", *instance.regulated_entity});
    }
  }
  if (instance.threshold) {
    if (auto key = canonical(*instance.threshold)) {
      slots.push_back({"threshold", *key, "regulated_activity_threshold", *instance.threshold});
    }
  }
  if (instance.quantity) {
    std::string key = instance.quantity->value.to_string() + " " +
                      text::to_string(instance.quantity->unit);
    slots.push_back({"quantity", key, "monetary_value", ""});
  }
  if (instance.direction != fuse::Direction::UNSPECIFIED) {
    slots.push_back({"direction", fuse::to_string(instance.direction), "change_action", ""});
  }
  if (instance.effective_date) {
    slots.push_back({"effective_date", instance.effective_date->to_string(), "effective_date", ""});
  }
  if (instance.citation) {
    if (auto key = canonical(*instance.citation)) {
      slots.push_back({"citation", *key, "regulation_citation", *instance.citation});
    }
  }

  for (const auto& slot : slots) {
    if (add_node(slot.node_key, slot.node_label)) ++report.nodes_added;
    if (!slot.surface.empty()) add_surface_form(slot.node_key, slot.surface);
    add_edge(event_key, slot.edge_label, slot.node_key, instance.article_id, report);
  }

  for (const auto& triple : instance.triples) {
    auto subject_key = canonical(triple.subject.surface);
    auto object_key = canonical(triple.object.surface);
    if (!subject_key || !object_key) continue;
    if (add_node(*subject_key, extract::to_string(triple.subject.entity_type))) ++report.nodes_added;
    if (add_node(*object_key, extract::to_string(triple.object.entity_type))) ++report.nodes_added;
    add_surface_form(*subject_key, triple.subject.surface);
    add_surface_form(*object_key, triple.object.surface);
    std::string provenance =
        instance.article_id + "#" + std::to_string(triple.sentence_index);
    add_edge(*subject_key, triple.predicate_label, *object_key, provenance, report);
  }
  return report;
}

MergeReport Graph::ingest_nic(const std::vector<ingest::InstitutionRecord>& records,
                              const NicLinkColumns& links) {
  MergeReport report;

  auto node_key = [](const std::string& rssd) { return "rssd:" + rssd; };

  for (const auto& rec : records) {
    std::string key = node_key(rec.rssd_id);
    if (add_node(key, to_lower(ingest::to_string(rec.kind)))) ++report.nodes_added;
    if (!rec.name.empty()) {
      set_property(key, "name", rec.name);
      add_surface_form(key, rec.name);
    }
    for (const auto& [name, value] : rec.properties) set_property(key, name, value);
  }

  auto link = [&](const std::string& from_key, const std::string& label,
                  const std::string& target_rssd, const std::string& what) {
    std::string to_key = node_key(target_rssd);
    if (!nodes_.count(to_key)) {
      report.diagnostics.push_back("DanglingParent: " + what + " " + target_rssd +
                                   " missing for " + from_key);
      return;
    }
    add_edge(from_key, label, to_key, "NIC", report);
  };

  for (const auto& rec : records) {
    std::string key = node_key(rec.rssd_id);
    if (rec.parent_rssd_id) {
      if (rec.kind == ingest::InstitutionKind::BANK_BRANCH) {
        link(key, "BRANCH_OF", *rec.parent_rssd_id, "parent");
      } else if (rec.kind == ingest::InstitutionKind::BANK) {
        link(key, "HELD_BY", *rec.parent_rssd_id, "parent");
      }
    }
    for (const auto& column : links.regulator_columns) {
      auto it = rec.properties.find(column);
      if (it != rec.properties.end() && !it->second.empty()) {
        link(key, "REGULATED_BY", it->second, column);
      }
    }
    for (const auto& column : links.insurer_columns) {
      auto it = rec.properties.find(column);
      if (it != rec.properties.end() && !it->second.empty()) {
        link(key, "INSURED_BY", it->second, column);
      }
    }
  }
  return report;
}

bool Graph::check_integrity() const {
  for (const auto& [key, node] : nodes_) {
    if (key.empty() || key != node.key) return false;
  }
  for (const auto& [edge, provenance] : edges_) {
    if (!nodes_.count(edge.from) || !nodes_.count(edge.to)) return false;
    if (edge.label.empty() || provenance.empty()) return false;
  }
  return true;
}

std::string Graph::serialize() const {
  std::string out;
  for (const auto& [key, node] : nodes_) {
    json props(node.properties);
    out += "N\t" + key + "\t" + node.label + "\t" + props.dump() + "\n";
  }
  for (const auto& [edge, provenance] : edges_) {
    json prov(provenance);
    out += "E\t" + edge.from + "\t" + edge.label + "\t" + edge.to + "\t" + prov.dump() + "\n";
  }
  return out;
}

Graph Graph::deserialize(const std::string& content) {
  Graph g;
  size_t line_no = 0;
  size_t start = 0;
  bool edges_started = false;
  while (start < content.size()) {
    size_t nl = content.find('\n', start);
    std::string line = nl == std::string::npos ? content.substr(start)
                                               : content.substr(start, nl - start);
    start = nl == std::string::npos ? content.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) -> Error {
      return Error(ErrorCode::malformed_input, "line " + std::to_string(line_no) + ": " + why);
    };
    auto fields = split(line, '\t');
    auto parse_json = [&](const std::string& raw) {
      try {
        return json::parse(raw);
      } catch (const json::parse_error& e) {
        throw fail(e.what());
      }
    };
    if (fields[0] == "N") {
      if (edges_started) throw fail("node record after edges");
      if (fields.size() != 4) throw fail("node record needs 4 fields");
      if (fields[1].empty()) throw fail("empty node key");
      json props = parse_json(fields[3]);
      if (!props.is_object()) throw fail("node properties must be a JSON object");
      Node node;
      node.key = fields[1];
      node.label = fields[2];
      for (auto it = props.begin(); it != props.end(); ++it) {
        if (!it.value().is_string()) throw fail("node property values must be strings");
        node.properties[it.key()] = it.value().get<std::string>();
      }
      if (!g.nodes_.emplace(node.key, std::move(node)).second) throw fail("duplicate node key");
    } else if (fields[0] == "E") {
      edges_started = true;
      if (fields.size() != 5) throw fail("edge record needs 5 fields");
      json prov = parse_json(fields[4]);
      if (!prov.is_array()) throw fail("edge provenance must be a JSON array");
      EdgeKey key{fields[1], fields[2], fields[3]};
      if (!g.nodes_.count(key.from) || !g.nodes_.count(key.to)) throw fail("edge endpoint unknown");
      auto [it, inserted] = g.edges_.try_emplace(std::move(key));
      if (!inserted) throw fail("duplicate edge");
      for (const auto& p : prov) {
        if (!p.is_string()) throw fail("provenance entries must be strings");
        it->second.insert(p.get<std::string>());
      }
      if (it->second.empty()) throw fail("edge without provenance");
    } else {
      throw fail("unknown record type: " + fields[0]);
    }
  }
  return g;
}

void Graph::persist(const std::string& path) const {
  write_file_atomic(path, serialize());
}

Graph Graph::load(const std::string& path) {
  return deserialize(read_file(path));
}

Pattern Pattern::parse(const std::vector<std::string>& tokens) {
  if (tokens.size() != 3 && tokens.size() != 5) {
    throw Error(ErrorCode::unsupported_pattern,
                "pattern needs 3 fields (1 hop) or 5 fields (2 hops), got " +
                    std::to_string(tokens.size()));
  }
  Pattern p;
  p.fields = tokens;
  for (auto& f : p.fields) {
    if (f.empty()) throw Error(ErrorCode::unsupported_pattern, "empty pattern field");
  }
  if (tokens.size() == 5) {
    auto wild = [](const std::string& f) { return f == "*" ? 1 : 0; };
    // The middle field is the join position and may always be unbound.
    if (wild(tokens[0]) + wild(tokens[1]) > 1 || wild(tokens[3]) + wild(tokens[4]) > 1) {
      throw Error(ErrorCode::unsupported_pattern, "at most one wildcard per hop");
    }
  }
  return p;
}

namespace {

bool matches(const std::string& pattern, const std::string& value) {
  return pattern == "*" || pattern == value;
}

}  // namespace

std::vector<std::vector<std::string>> query_pattern(const Graph& graph, const Pattern& pattern) {
  std::vector<std::vector<std::string>> out;
  const auto& fields = pattern.fields;
  if (fields.size() == 3) {
    for (const auto& [edge, _] : graph.edges()) {
      if (matches(fields[0], edge.from) && matches(fields[1], edge.label) &&
          matches(fields[2], edge.to)) {
        out.push_back({edge.from, edge.label, edge.to});
      }
    }
  } else {
    for (const auto& [first, _] : graph.edges()) {
      if (!matches(fields[0], first.from) || !matches(fields[1], first.label) ||
          !matches(fields[2], first.to)) {
        continue;
      }
      for (const auto& [second, __] : graph.edges()) {
        if (second.from != first.to) continue;
        if (!matches(fields[3], second.label) || !matches(fields[4], second.to)) continue;
        out.push_back({first.from, first.label, first.to, second.label, second.to});
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace regwatch::kg
