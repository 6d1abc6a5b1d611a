#include "regwatch/relate.hpp"

#include <algorithm>

#include "regwatch/textfile.hpp"

namespace regwatch::relate {

namespace {

const std::set<std::string>& coordinating_conjunctions() {
  static const std::set<std::string> kWords = {"and", "but", "or", "nor", "so", "yet"};
  return kWords;
}

extract::EntityMention untyped_mention(const ingest::Article& article, text::Span span,
                                       size_t sentence_index) {
  extract::EntityMention m;
  m.span = span;
  m.sentence_index = sentence_index;
  m.entity_type = extract::EntityType::UNTYPED;
  m.source = extract::Source::CUSTOM;
  m.stream = extract::Stream::CUSTOM;
  m.surface = article.body_text.substr(span.start, span.length());
  return m;
}

}  // namespace

const char* to_string(Provenance p) {
  return p == Provenance::VERB_PATH ? "verb_path" : "clause_svo";
}

std::vector<RelationTriple> extract_relations(const ingest::Article& article,
                                              const std::vector<text::Sentence>& sentences,
                                              const extract::EntityMention& first,
                                              const extract::EntityMention& second,
                                              const extract::VerbLexicon& verbs,
                                              const std::set<std::string>& prepositions) {
  std::vector<RelationTriple> out;
  if (first.sentence_index != second.sentence_index) return out;
  if (first.sentence_index >= sentences.size()) return out;

  // Subject is chosen by text order, not argument order.
  const extract::EntityMention& subject =
      first.span.start <= second.span.start ? first : second;
  const extract::EntityMention& object =
      first.span.start <= second.span.start ? second : first;
  if (subject.span.start >= object.span.start) return out;  // identical starts: nothing between

  const text::Sentence& sentence = sentences[first.sentence_index];
  const auto& tokens = sentence.tokens;
  auto between = [&](const text::Token& t) {
    return t.span.start >= subject.span.end && t.span.end <= object.span.start;
  };

  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!between(tokens[i]) || !verbs.matches(tokens[i])) continue;
    std::string label = verbs.lemma_of(tokens[i].surface);
    if (i + 1 < tokens.size() && between(tokens[i + 1]) &&
        tokens[i + 1].kind == text::TokenKind::WORD &&
        prepositions.count(to_lower(tokens[i + 1].surface))) {
      label += "_" + to_lower(tokens[i + 1].surface);
    }
    RelationTriple triple;
    triple.subject = subject;
    triple.predicate_label = std::move(label);
    triple.object = object;
    triple.article_id = article.id;
    triple.sentence_index = sentence.index;
    triple.provenance = Provenance::VERB_PATH;
    out.push_back(std::move(triple));
  }
  return out;
}

std::vector<RelationTriple> clause_svo(const ingest::Article& article,
                                       const text::Sentence& sentence,
                                       const extract::VerbLexicon& verbs) {
  const auto& tokens = sentence.tokens;
  std::vector<std::pair<size_t, size_t>> clauses;  // [begin, end) token ranges
  size_t begin = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    bool splitter = (tokens[i].kind == text::TokenKind::PUNCT && tokens[i].surface == ";") ||
                    (tokens[i].kind == text::TokenKind::WORD &&
                     coordinating_conjunctions().count(to_lower(tokens[i].surface)));
    if (splitter) {
      if (i > begin) clauses.emplace_back(begin, i);
      begin = i + 1;
    }
  }
  if (tokens.size() > begin) clauses.emplace_back(begin, tokens.size());

  std::vector<RelationTriple> out;
  for (auto [lo, hi] : clauses) {
    size_t verb = hi;
    for (size_t i = lo; i < hi; ++i) {
      if (verbs.matches(tokens[i])) {
        verb = i;
        break;
      }
    }
    if (verb == hi) continue;

    auto is_punct = [&](size_t i) { return tokens[i].kind == text::TokenKind::PUNCT; };
    // Maximal non-punctuation runs adjacent to the predicate, inside the clause.
    size_t sub_end = verb;
    size_t sub_begin = verb;
    while (sub_begin > lo && !is_punct(sub_begin - 1)) --sub_begin;
    size_t obj_begin = verb + 1;
    size_t obj_end = obj_begin;
    while (obj_end < hi && !is_punct(obj_end)) ++obj_end;
    if (sub_begin == sub_end || obj_begin == obj_end) continue;

    RelationTriple triple;
    triple.subject = untyped_mention(
        article, text::Span{tokens[sub_begin].span.start, tokens[sub_end - 1].span.end},
        sentence.index);
    triple.object = untyped_mention(
        article, text::Span{tokens[obj_begin].span.start, tokens[obj_end - 1].span.end},
        sentence.index);
    triple.predicate_label = verbs.lemma_of(tokens[verb].surface);
    triple.article_id = article.id;
    triple.sentence_index = sentence.index;
    triple.provenance = Provenance::CLAUSE_SVO;
    out.push_back(std::move(triple));
  }
  return out;
}

std::vector<extract::EntityMention> dedupe_mentions(std::vector<extract::EntityMention> mentions) {
  std::vector<extract::EntityMention> out;
  std::set<std::tuple<size_t, size_t, int>> seen;
  for (auto& m : mentions) {
    if (seen.insert({m.span.start, m.span.end, static_cast<int>(m.entity_type)}).second) {
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<std::pair<extract::EntityMention, extract::EntityMention>> enumerate_pairs(
    const std::vector<extract::EntityMention>& entities) {
  std::vector<extract::EntityMention> sorted = entities;
  std::sort(sorted.begin(), sorted.end(),
            [](const extract::EntityMention& a, const extract::EntityMention& b) {
              if (a.span != b.span) return a.span < b.span;
              return static_cast<int>(a.entity_type) < static_cast<int>(b.entity_type);
            });
  std::vector<std::pair<extract::EntityMention, extract::EntityMention>> out;
  for (size_t i = 0; i < sorted.size(); ++i) {
    for (size_t j = i + 1; j < sorted.size(); ++j) {
      out.emplace_back(sorted[i], sorted[j]);
    }
  }
  return out;
}

}  // namespace regwatch::relate
