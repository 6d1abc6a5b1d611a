#include "regwatch/extract.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "regwatch/errors.hpp"
#include "regwatch/textfile.hpp"

namespace regwatch::extract {

using nlohmann::json;

const char* to_string(EntityType type) {
  switch (type) {
    case EntityType::REGULATORY_AUTHORITY: return "regulatory_authority";
    case EntityType::REGULATED_ACTIVITY_THRESHOLD: return "regulated_activity_threshold";
    case EntityType::REGULATED_ENTITY: return "regulated_entity";
    case EntityType::MONETARY_VALUE: return "monetary_value";
    case EntityType::EFFECTIVE_DATE: return "effective_date";
    case EntityType::REGULATION_CITATION: return "regulation_citation";
    case EntityType::CHANGE_ACTION: return "change_action";
    case EntityType::UNTYPED: return "untyped";
  }
  return "untyped";
}

std::optional<EntityType> entity_type_from_string(std::string_view name) {
  for (EntityType t : {EntityType::REGULATORY_AUTHORITY, EntityType::REGULATED_ACTIVITY_THRESHOLD,
                       EntityType::REGULATED_ENTITY, EntityType::MONETARY_VALUE,
                       EntityType::EFFECTIVE_DATE, EntityType::REGULATION_CITATION,
                       EntityType::CHANGE_ACTION, EntityType::UNTYPED}) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

const char* to_string(Source source) {
  switch (source) {
    case Source::CUSTOM: return "custom";
    case Source::SRL: return "srl";
    case Source::EXTERNAL: return "external";
  }
  return "custom";
}

const char* to_string(Stream stream) {
  return stream == Stream::CUSTOM ? "custom" : "srl";
}

const char* to_string(ArgumentRole role) {
  return role == ArgumentRole::ARG_BEFORE ? "before" : "after";
}

Gazetteer Gazetteer::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

Gazetteer Gazetteer::from_lines(const std::vector<std::string>& lines) {
  Gazetteer out;
  for (const auto& line : lines) {
    auto parts = split(line, '\t');
    if (parts.size() != 3) {
      throw Error(ErrorCode::malformed_input, "gazetteer entry needs type<TAB>phrase<TAB>mode: " + line);
    }
    auto type = entity_type_from_string(trim(parts[0]));
    if (!type || *type == EntityType::UNTYPED) {
      throw Error(ErrorCode::malformed_input, "gazetteer entry with unknown type: " + parts[0]);
    }
    std::string mode_name = to_lower(trim(parts[2]));
    MatchMode mode;
    if (mode_name == "exact") mode = MatchMode::EXACT;
    else if (mode_name == "prefix") mode = MatchMode::PREFIX;
    else throw Error(ErrorCode::malformed_input, "gazetteer match mode: " + parts[2]);
    out.add(*type, trim(parts[1]), mode);
  }
  return out;
}

void Gazetteer::add(EntityType type, const std::string& phrase, MatchMode mode) {
  if (phrase.empty()) throw Error(ErrorCode::malformed_input, "empty gazetteer phrase");
  if (!seen_.insert({static_cast<int>(type), to_lower(phrase)}).second) {
    throw Error(ErrorCode::malformed_input, "duplicate gazetteer entry: " + phrase);
  }
  GazetteerEntry entry;
  entry.type = type;
  entry.phrase = phrase;
  entry.mode = mode;
  for (const auto& tok : text::tokenize(phrase)) {
    entry.phrase_tokens.push_back(to_lower(tok.surface));
  }
  if (entry.phrase_tokens.empty()) {
    throw Error(ErrorCode::malformed_input, "gazetteer phrase has no tokens: " + phrase);
  }
  entries_.push_back(std::move(entry));
}

void Gazetteer::add_institutions(const std::vector<ingest::InstitutionRecord>& records) {
  for (const auto& rec : records) {
    if (rec.name.empty()) continue;
    EntityType type = rec.kind == ingest::InstitutionKind::REGULATOR
                          ? EntityType::REGULATORY_AUTHORITY
                          : EntityType::REGULATED_ENTITY;
    if (seen_.count({static_cast<int>(type), to_lower(rec.name)})) continue;
    add(type, rec.name, MatchMode::EXACT);
  }
}

VerbLexicon VerbLexicon::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

VerbLexicon VerbLexicon::from_lines(const std::vector<std::string>& lines) {
  VerbLexicon out;
  for (const auto& line : lines) {
    std::vector<std::string> forms;
    for (const auto& part : split(line, ' ')) {
      std::string w = trim(part);
      if (!w.empty()) forms.push_back(to_lower(w));
    }
    if (forms.empty()) continue;
    const std::string& lemma = forms[0];
    out.lemmas_.insert(lemma);
    for (const auto& form : forms) out.lemma_by_form_[form] = lemma;
  }
  return out;
}

bool VerbLexicon::contains_lemma(std::string_view lemma) const {
  return lemmas_.find(lemma) != lemmas_.end();
}

std::string VerbLexicon::lemma_of(std::string_view surface) const {
  std::string lowered = to_lower(surface);
  auto it = lemma_by_form_.find(lowered);
  if (it != lemma_by_form_.end()) return it->second;
  return lowered;
}

bool VerbLexicon::matches(const text::Token& token) const {
  return token.kind == text::TokenKind::WORD && contains_lemma(lemma_of(token.surface));
}

PatternSet PatternSet::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

PatternSet PatternSet::from_lines(const std::vector<std::string>& lines) {
  PatternSet out;
  for (const auto& line : lines) {
    try {
      out.patterns_.emplace_back(line, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::malformed_input, "bad pattern '" + line + "': " + e.what());
    }
  }
  return out;
}

namespace {

bool is_alnum_byte(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::vector<text::Span> PatternSet::find(std::string_view input) const {
  std::vector<text::Span> out;
  const char* begin = input.data();
  const char* end = begin + input.size();
  for (const auto& re : patterns_) {
    for (std::cregex_iterator it(begin, end, re), last; it != last; ++it) {
      size_t start = static_cast<size_t>(it->position(0));
      size_t stop = start + static_cast<size_t>(it->length(0));
      if (start == stop) continue;
      // Matches must not start or end mid-word.
      if (start > 0 && is_alnum_byte(input[start - 1]) && is_alnum_byte(input[start])) continue;
      if (stop < input.size() && is_alnum_byte(input[stop]) && is_alnum_byte(input[stop - 1])) continue;
      out.push_back(text::Span{start, stop});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct Candidate {
  text::Span span;
  EntityType type = EntityType::UNTYPED;
  std::optional<text::QuantityMention> quantity;
};

// All typing hits for one sentence, before overlap resolution.
std::vector<Candidate> sentence_candidates(std::string_view body, const text::Sentence& sentence,
                                           const EntityRules& rules) {
  std::vector<Candidate> out;
  const auto& tokens = sentence.tokens;

  // Gazetteer phrases over token sequences.
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& entry : rules.gazetteer.entries()) {
      size_t n = entry.phrase_tokens.size();
      if (i + n > tokens.size()) continue;
      bool ok = true;
      for (size_t k = 0; k < n && ok; ++k) {
        std::string word = to_lower(tokens[i + k].surface);
        const std::string& want = entry.phrase_tokens[k];
        bool last = k + 1 == n;
        if (entry.mode == MatchMode::PREFIX && last) {
          ok = word.size() >= want.size() && word.compare(0, want.size(), want) == 0;
        } else {
          ok = word == want;
        }
      }
      if (!ok) continue;
      out.push_back({text::Span{tokens[i].span.start, tokens[i + n - 1].span.end}, entry.type, {}});
    }
  }

  // Quantities with a real unit.
  auto scan = text::normalize_quantities(tokens, rules.scales);
  for (auto& q : scan.mentions) {
    if (q.unit == text::Unit::USD || q.unit == text::Unit::PERCENT) {
      out.push_back({q.span, EntityType::MONETARY_VALUE, q});
    }
  }

  // Dates and citations over the sentence text.
  std::string_view sentence_text = body.substr(sentence.span.start, sentence.span.length());
  for (auto span : rules.date_patterns.find(sentence_text)) {
    out.push_back({text::Span{span.start + sentence.span.start, span.end + sentence.span.start},
                   EntityType::EFFECTIVE_DATE,
                   {}});
  }
  for (auto span : rules.citation_patterns.find(sentence_text)) {
    out.push_back({text::Span{span.start + sentence.span.start, span.end + sentence.span.start},
                   EntityType::REGULATION_CITATION,
                   {}});
  }

  // Change-action verbs.
  for (const auto& tok : tokens) {
    if (tok.kind != text::TokenKind::WORD) continue;
    if (rules.change_verbs.count(rules.verbs.lemma_of(tok.surface))) {
      out.push_back({tok.span, EntityType::CHANGE_ACTION, {}});
    }
  }

  return out;
}

// Longest match first, ties to the earlier start, then to the smaller type
// ordinal so equal spans resolve deterministically.
void resolve_overlaps(std::vector<Candidate>& candidates) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return static_cast<int>(a.type) < static_cast<int>(b.type);
  });
  std::vector<Candidate> kept;
  for (auto& c : candidates) {
    bool clear = std::none_of(kept.begin(), kept.end(),
                              [&](const Candidate& k) { return k.span.overlaps(c.span); });
    if (clear) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(),
            [](const Candidate& a, const Candidate& b) { return a.span < b.span; });
  candidates = std::move(kept);
}

EntityMention make_mention(std::string_view body, const Candidate& c, size_t sentence_index,
                           Source source, Stream stream) {
  EntityMention m;
  m.span = c.span;
  m.sentence_index = sentence_index;
  m.entity_type = c.type;
  m.source = source;
  m.stream = stream;
  m.surface = std::string(body.substr(c.span.start, c.span.length()));
  m.quantity = c.quantity;
  return m;
}

}  // namespace

std::vector<EntityMention> extract_entities(const ingest::Article& article,
                                            const std::vector<text::Sentence>& sentences,
                                            const EntityRules& rules) {
  std::vector<EntityMention> out;
  for (const auto& sentence : sentences) {
    auto candidates = sentence_candidates(article.body_text, sentence, rules);
    resolve_overlaps(candidates);
    for (const auto& c : candidates) {
      out.push_back(make_mention(article.body_text, c, sentence.index, Source::CUSTOM, Stream::CUSTOM));
    }
  }
  return out;
}

std::vector<PredicateFrame> extract_frames(const ingest::Article& article,
                                           const std::vector<text::Sentence>& sentences,
                                           const VerbLexicon& verbs) {
  if (verbs.empty()) throw Error(ErrorCode::malformed_input, "empty verb lexicon");
  std::vector<PredicateFrame> out;
  (void)article;
  for (const auto& sentence : sentences) {
    const auto& tokens = sentence.tokens;
    std::vector<bool> is_predicate(tokens.size(), false);
    for (size_t i = 0; i < tokens.size(); ++i) is_predicate[i] = verbs.matches(tokens[i]);

    auto blocked = [&](size_t i) {
      return tokens[i].kind == text::TokenKind::PUNCT || is_predicate[i];
    };

    for (size_t p = 0; p < tokens.size(); ++p) {
      if (!is_predicate[p]) continue;
      PredicateFrame frame;
      frame.predicate_span = tokens[p].span;
      frame.predicate_lemma = verbs.lemma_of(tokens[p].surface);
      frame.sentence_index = sentence.index;

      if (p > 0 && !blocked(p - 1)) {
        size_t b = p - 1;
        while (b > 0 && !blocked(b - 1)) --b;
        frame.arguments.push_back(
            {ArgumentRole::ARG_BEFORE, text::Span{tokens[b].span.start, tokens[p - 1].span.end}});
      }
      if (p + 1 < tokens.size() && !blocked(p + 1)) {
        size_t e = p + 1;
        while (e + 1 < tokens.size() && !blocked(e + 1)) ++e;
        frame.arguments.push_back(
            {ArgumentRole::ARG_AFTER, text::Span{tokens[p + 1].span.start, tokens[e].span.end}});
      }
      if (!frame.arguments.empty()) out.push_back(std::move(frame));
    }
  }
  return out;
}

std::vector<EntityMention> frames_to_entities(const std::vector<PredicateFrame>& frames,
                                              const ingest::Article& article,
                                              const std::vector<text::Sentence>& sentences,
                                              const EntityRules& rules) {
  // Typing hits are computed once per sentence, then filtered per argument.
  std::map<size_t, std::vector<Candidate>> hits_by_sentence;
  auto hits_for = [&](size_t index) -> const std::vector<Candidate>& {
    auto it = hits_by_sentence.find(index);
    if (it == hits_by_sentence.end()) {
      auto candidates = sentence_candidates(article.body_text, sentences.at(index), rules);
      it = hits_by_sentence.emplace(index, std::move(candidates)).first;
    }
    return it->second;
  };

  std::vector<EntityMention> out;
  std::set<std::tuple<size_t, size_t, int>> seen;  // (start, end, type)
  auto emit = [&](const Candidate& c, size_t sentence_index) {
    if (!seen.insert({c.span.start, c.span.end, static_cast<int>(c.type)}).second) return;
    out.push_back(make_mention(article.body_text, c, sentence_index, Source::SRL, Stream::SRL));
  };

  for (const auto& frame : frames) {
    for (const auto& arg : frame.arguments) {
      std::vector<Candidate> inside;
      for (const auto& c : hits_for(frame.sentence_index)) {
        if (arg.span.contains(c.span)) inside.push_back(c);
      }
      if (inside.empty()) {
        emit({arg.span, EntityType::UNTYPED, {}}, frame.sentence_index);
        continue;
      }
      resolve_overlaps(inside);
      for (const auto& c : inside) emit(c, frame.sentence_index);
    }
  }
  std::sort(out.begin(), out.end(), [](const EntityMention& a, const EntityMention& b) {
    if (a.span != b.span) return a.span < b.span;
    return static_cast<int>(a.entity_type) < static_cast<int>(b.entity_type);
  });
  return out;
}

namespace {

size_t sentence_index_for(const std::vector<text::Sentence>& sentences, size_t offset) {
  for (const auto& s : sentences) {
    if (offset >= s.span.start && offset < s.span.end) return s.index;
  }
  // Offsets in inter-sentence gaps attach to the following sentence.
  for (const auto& s : sentences) {
    if (s.span.end > offset) return s.index;
  }
  return sentences.empty() ? 0 : sentences.back().index;
}

text::Span span_from_json(const json& j, const std::string& where, const ingest::Article& article) {
  if (!j.contains("start") || !j.contains("end") || !j["start"].is_number_unsigned() ||
      !j["end"].is_number_unsigned()) {
    throw Error(ErrorCode::malformed_input, where + ": start/end must be non-negative integers");
  }
  text::Span span{j["start"].get<size_t>(), j["end"].get<size_t>()};
  if (!span.valid_in(article.body_text)) {
    throw Error(ErrorCode::span_out_of_range,
                where + ": [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                    ") in body of length " + std::to_string(article.body_text.size()));
  }
  return span;
}

}  // namespace

ExternalAnnotations load_external_annotations(const std::string& raw_json,
                                              const ingest::Article& article,
                                              const std::vector<text::Sentence>& sentences) {
  json j;
  try {
    j = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_input, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::malformed_input, "annotations must be a JSON object");
  if (!j.contains("article_id") || !j["article_id"].is_string()) {
    throw Error(ErrorCode::missing_field, "article_id");
  }
  if (j["article_id"].get<std::string>() != article.id) {
    throw Error(ErrorCode::malformed_input,
                "annotations for article " + j["article_id"].get<std::string>() +
                    " applied to article " + article.id);
  }

  ExternalAnnotations out;
  if (j.contains("entities")) {
    if (!j["entities"].is_array()) throw Error(ErrorCode::malformed_input, "entities must be an array");
    size_t i = 0;
    for (const auto& e : j["entities"]) {
      std::string where = "entities[" + std::to_string(i++) + "]";
      text::Span span = span_from_json(e, where, article);
      if (!e.contains("type") || !e["type"].is_string()) {
        throw Error(ErrorCode::malformed_input, where + ": missing type");
      }
      auto type = entity_type_from_string(e["type"].get<std::string>());
      if (!type) {
        throw Error(ErrorCode::malformed_input, where + ": unknown type " + e["type"].get<std::string>());
      }
      if (!e.contains("stream") || !e["stream"].is_string()) {
        throw Error(ErrorCode::malformed_input, where + ": missing stream");
      }
      std::string stream_name = e["stream"].get<std::string>();
      Stream stream;
      if (stream_name == "custom") stream = Stream::CUSTOM;
      else if (stream_name == "srl") stream = Stream::SRL;
      else throw Error(ErrorCode::malformed_input, where + ": unknown stream " + stream_name);

      EntityMention m;
      m.span = span;
      m.sentence_index = sentence_index_for(sentences, span.start);
      m.entity_type = *type;
      m.source = Source::EXTERNAL;
      m.stream = stream;
      m.surface = article.body_text.substr(span.start, span.length());
      out.mentions.push_back(std::move(m));
    }
  }

  if (j.contains("frames")) {
    if (!j["frames"].is_array()) throw Error(ErrorCode::malformed_input, "frames must be an array");
    size_t i = 0;
    for (const auto& f : j["frames"]) {
      std::string where = "frames[" + std::to_string(i++) + "]";
      if (!f.contains("predicate") || !f["predicate"].is_object()) {
        throw Error(ErrorCode::malformed_input, where + ": missing predicate");
      }
      PredicateFrame frame;
      frame.predicate_span = span_from_json(f["predicate"], where + ".predicate", article);
      if (!f["predicate"].contains("lemma") || !f["predicate"]["lemma"].is_string()) {
        throw Error(ErrorCode::malformed_input, where + ": predicate lemma missing");
      }
      frame.predicate_lemma = to_lower(f["predicate"]["lemma"].get<std::string>());
      frame.sentence_index = sentence_index_for(sentences, frame.predicate_span.start);
      if (!f.contains("arguments") || !f["arguments"].is_array() || f["arguments"].empty()) {
        throw Error(ErrorCode::malformed_input, where + ": frame needs at least one argument");
      }
      size_t k = 0;
      for (const auto& a : f["arguments"]) {
        std::string arg_where = where + ".arguments[" + std::to_string(k++) + "]";
        FrameArgument arg;
        arg.span = span_from_json(a, arg_where, article);
        if (!a.contains("role") || !a["role"].is_string()) {
          throw Error(ErrorCode::malformed_input, arg_where + ": missing role");
        }
        std::string role = a["role"].get<std::string>();
        if (role == "before") arg.role = ArgumentRole::ARG_BEFORE;
        else if (role == "after") arg.role = ArgumentRole::ARG_AFTER;
        else throw Error(ErrorCode::malformed_input, arg_where + ": unknown role " + role);
        if (arg.span.overlaps(frame.predicate_span)) {
          throw Error(ErrorCode::malformed_input, arg_where + ": argument overlaps predicate");
        }
        frame.arguments.push_back(arg);
      }
      out.frames.push_back(std::move(frame));
    }
  }
  return out;
}

}  // namespace regwatch::extract
