#pragma once

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "regwatch/ingest.hpp"
#include "regwatch/textcore.hpp"

namespace regwatch::extract {

// The task data-model's closed entity set, plus the reserved bucket for
// SRL arguments that no typing rule claims. UNTYPED never survives the
// intersection filter as a custom label.
enum class EntityType {
  REGULATORY_AUTHORITY,
  REGULATED_ACTIVITY_THRESHOLD,
  REGULATED_ENTITY,
  MONETARY_VALUE,
  EFFECTIVE_DATE,
  REGULATION_CITATION,
  CHANGE_ACTION,
  UNTYPED,
};

const char* to_string(EntityType type);
std::optional<EntityType> entity_type_from_string(std::string_view name);

enum class Source { CUSTOM, SRL, EXTERNAL };
// Which Figure-2 branch a mention belongs to. For rule-based mentions this
// mirrors the source; EXTERNAL mentions carry the file's stream field.
enum class Stream { CUSTOM, SRL };

const char* to_string(Source source);
const char* to_string(Stream stream);

struct EntityMention {
  text::Span span;
  size_t sentence_index = 0;
  EntityType entity_type = EntityType::UNTYPED;
  Source source = Source::CUSTOM;
  Stream stream = Stream::CUSTOM;
  std::string surface;
  // Set when entity_type == MONETARY_VALUE and the surface was normalized.
  std::optional<text::QuantityMention> quantity;
};

enum class ArgumentRole { ARG_BEFORE, ARG_AFTER };

const char* to_string(ArgumentRole role);

struct FrameArgument {
  ArgumentRole role = ArgumentRole::ARG_BEFORE;
  text::Span span;
};

struct PredicateFrame {
  text::Span predicate_span;
  std::string predicate_lemma;
  std::vector<FrameArgument> arguments;  // at least one
  size_t sentence_index = 0;
};

enum class MatchMode { EXACT, PREFIX };

struct GazetteerEntry {
  EntityType type = EntityType::UNTYPED;
  std::string phrase;
  MatchMode mode = MatchMode::EXACT;
  std::vector<std::string> phrase_tokens;  // lowercased
};

// Dictionary matcher standing in for the trained entity model. PREFIX mode
// compares the last phrase token as a prefix of the text token ("bank"
// matches "banks"); all other tokens compare exact, case-insensitive.
class Gazetteer {
 public:
  static Gazetteer load(const std::string& path);
  static Gazetteer from_lines(const std::vector<std::string>& lines);

  void add(EntityType type, const std::string& phrase, MatchMode mode);
  // NIC bootstrap: regulators become regulatory_authority phrases, all other
  // institution kinds become regulated_entity phrases.
  void add_institutions(const std::vector<ingest::InstitutionRecord>& records);

  const std::vector<GazetteerEntry>& entries() const { return entries_; }

 private:
  std::vector<GazetteerEntry> entries_;
  std::set<std::pair<int, std::string>> seen_;  // (type, phrase) uniqueness
};

// Verb lemma set with an inflection table; unknown forms lemmatize to their
// lowercased surface.
class VerbLexicon {
 public:
  static VerbLexicon load(const std::string& path);
  static VerbLexicon from_lines(const std::vector<std::string>& lines);

  bool contains_lemma(std::string_view lemma) const;
  std::string lemma_of(std::string_view surface) const;
  bool matches(const text::Token& token) const;
  const std::set<std::string, std::less<>>& lemmas() const { return lemmas_; }
  bool empty() const { return lemmas_.empty(); }

 private:
  std::set<std::string, std::less<>> lemmas_;
  std::map<std::string, std::string, std::less<>> lemma_by_form_;
};

// One ECMAScript regex per line; matches must start and end on
// non-alphanumeric boundaries in the surrounding text.
class PatternSet {
 public:
  static PatternSet load(const std::string& path);
  static PatternSet from_lines(const std::vector<std::string>& lines);

  std::vector<text::Span> find(std::string_view text) const;
  bool empty() const { return patterns_.empty(); }

 private:
  std::vector<std::regex> patterns_;
};

// Everything the custom extractor and the SRL typing pass share.
struct EntityRules {
  Gazetteer gazetteer;
  VerbLexicon verbs;                   // predicate lexicon (change + reporting verbs)
  std::set<std::string> change_verbs;  // lemmas typed as change_action
  text::ScaleLexicon scales;
  PatternSet date_patterns;
  PatternSet citation_patterns;
};

// Custom entity stream: gazetteer phrases, USD/percent quantities, dates,
// citations, change verbs. Longest match wins, ties to the earlier start;
// output is sorted by span and never self-overlaps.
std::vector<EntityMention> extract_entities(const ingest::Article& article,
                                            const std::vector<text::Sentence>& sentences,
                                            const EntityRules& rules);

// SRL-shaped stream: every lexicon verb is a predicate; its arguments are
// the maximal non-punctuation token runs immediately left and right,
// bounded by other predicates. Frames with no arguments are dropped.
std::vector<PredicateFrame> extract_frames(const ingest::Article& article,
                                           const std::vector<text::Sentence>& sentences,
                                           const VerbLexicon& verbs);

// Types each frame argument by re-running the entity rules over it: one SRL
// mention per typing hit inside the argument; an argument with no hits
// yields a single UNTYPED mention spanning the whole argument.
std::vector<EntityMention> frames_to_entities(const std::vector<PredicateFrame>& frames,
                                              const ingest::Article& article,
                                              const std::vector<text::Sentence>& sentences,
                                              const EntityRules& rules);

struct ExternalAnnotations {
  std::vector<EntityMention> mentions;  // source == EXTERNAL, stream per file
  std::vector<PredicateFrame> frames;
};

// Ingest real model outputs (spans are byte offsets into the article body):
// {article_id, entities:[{start,end,type,stream}],
//  frames:[{predicate:{start,end,lemma}, arguments:[{role,start,end}]}]}
ExternalAnnotations load_external_annotations(const std::string& raw_json,
                                              const ingest::Article& article,
                                              const std::vector<text::Sentence>& sentences);

}  // namespace regwatch::extract
