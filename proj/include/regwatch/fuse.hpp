#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "regwatch/date.hpp"
#include "regwatch/decimal.hpp"
#include "regwatch/relate.hpp"

namespace regwatch::fuse {

enum class Direction { INCREASE, DECREASE, UNSPECIFIED };

const char* to_string(Direction d);

// The slot-filled threshold-change event record for one article. Partial
// instances are legal; unfilled slots are listed in diagnostics.
struct DataModelInstance {
  std::string article_id;
  std::optional<std::string> authority;
  std::optional<std::string> regulated_entity;
  std::optional<std::string> threshold;
  std::optional<text::QuantityMention> quantity;
  Direction direction = Direction::UNSPECIFIED;
  std::optional<Date> effective_date;
  std::optional<std::string> citation;
  std::vector<relate::RelationTriple> triples;
  std::vector<std::string> diagnostics;
};

// "raise INCREASE" style lines, keyed by verb lemma.
class DirectionLexicon {
 public:
  static DirectionLexicon load(const std::string& path);
  static DirectionLexicon from_lines(const std::vector<std::string>& lines);
  std::optional<Direction> of(std::string_view lemma) const;

 private:
  std::map<std::string, Direction, std::less<>> by_lemma_;
};

// Figure-2 intersection filter: a CUSTOM mention survives iff some SRL
// mention in the same sentence overlaps it with byte-span Jaccard >=
// threshold. Surviving mentions keep their CUSTOM type label; UNTYPED SRL
// mentions may still validate. Output sorted by span.
std::vector<extract::EntityMention> intersect_entities(
    const std::vector<extract::EntityMention>& custom,
    const std::vector<extract::EntityMention>& srl, const Rational& overlap_threshold);

// First-occurrence slot filling over the post-intersection mentions, in text
// order. Direction comes from the first change_action whose lemma is in the
// lexicon, else the first VERB_PATH predicate (first '_'-segment of fused
// labels). Unfilled slots are recorded in diagnostics.
DataModelInstance fill_data_model(const ingest::Article& article,
                                  const std::vector<extract::EntityMention>& entities,
                                  const std::vector<relate::RelationTriple>& triples,
                                  const DirectionLexicon& directions,
                                  const extract::VerbLexicon& verbs,
                                  const text::ScaleLexicon& scales);

// Space-joined filled slot values followed by "subject predicate object" per
// triple. This is the "output" whose token count the summarization ratio
// divides by; an empty instance serializes to the empty string.
std::string slots_and_triples_text(const DataModelInstance& instance);

// token_count(body) / max(1, token_count(slots_and_triples_text)).
Rational summarization_ratio(const ingest::Article& article, const DataModelInstance& instance);

// Canonical JSON: sorted keys, decimal values as exact strings, unfilled
// slots omitted. Stable across runs and platforms.
std::string instance_to_json(const DataModelInstance& instance);
DataModelInstance instance_from_json(const std::string& raw_json);

struct PipelineConfig {
  extract::EntityRules rules;
  std::set<std::string> prepositions;
  DirectionLexicon directions;
  text::AbbreviationSet abbreviations;
  Rational overlap_threshold{1, 2};
};

struct PipelineResult {
  DataModelInstance instance;
  Rational ratio;
};

// segment -> tokenize -> {custom entities || frames} -> SRL mentions ->
// intersect -> pairs -> relations -> clause SVO -> slot fill -> ratio.
// When `annotations` is given, its custom/srl streams replace the rule-based
// extractors (external model outputs).
PipelineResult run_pipeline(const ingest::Article& article, const PipelineConfig& config,
                            const extract::ExternalAnnotations* annotations = nullptr);

}  // namespace regwatch::fuse
