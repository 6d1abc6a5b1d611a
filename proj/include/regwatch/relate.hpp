#pragma once

#include <set>
#include <string>
#include <vector>

#include "regwatch/extract.hpp"

namespace regwatch::relate {

enum class Provenance { VERB_PATH, CLAUSE_SVO };

const char* to_string(Provenance p);

struct RelationTriple {
  extract::EntityMention subject;  // the earlier mention by text order
  std::string predicate_label;     // verb lemma, "comply_with" when fused
  extract::EntityMention object;
  std::string article_id;
  size_t sentence_index = 0;
  Provenance provenance = Provenance::VERB_PATH;
};

// Every lexicon verb strictly between the two mention spans yields one
// triple; a verb followed directly by a preposition fuses into a
// verb_preposition label. Mentions in different sentences yield nothing.
std::vector<RelationTriple> extract_relations(const ingest::Article& article,
                                              const std::vector<text::Sentence>& sentences,
                                              const extract::EntityMention& first,
                                              const extract::EntityMention& second,
                                              const extract::VerbLexicon& verbs,
                                              const std::set<std::string>& prepositions);

// OpenIE-style fallback: split the sentence at coordinating conjunctions and
// semicolons; in each clause, first lexicon verb is the predicate, the
// adjacent non-punctuation runs are subject and object. Clauses missing any
// part yield nothing.
std::vector<RelationTriple> clause_svo(const ingest::Article& article,
                                       const text::Sentence& sentence,
                                       const extract::VerbLexicon& verbs);

// Drops duplicate (span, type) mentions, keeping the first.
std::vector<extract::EntityMention> dedupe_mentions(std::vector<extract::EntityMention> mentions);

// All unordered pairs of distinct mentions, earlier span first, ordered by
// (first.span.start, second.span.start). Count is n(n-1)/2.
std::vector<std::pair<extract::EntityMention, extract::EntityMention>> enumerate_pairs(
    const std::vector<extract::EntityMention>& entities);

}  // namespace regwatch::relate
