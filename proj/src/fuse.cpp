#include "regwatch/fuse.hpp"

#include <algorithm>

#include <json.hpp>

#include "regwatch/errors.hpp"
#include "regwatch/textfile.hpp"

namespace regwatch::fuse {

using nlohmann::json;

const char* to_string(Direction d) {
  switch (d) {
    case Direction::INCREASE: return "increase";
    case Direction::DECREASE: return "decrease";
    case Direction::UNSPECIFIED: return "unspecified";
  }
  return "unspecified";
}

DirectionLexicon DirectionLexicon::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

DirectionLexicon DirectionLexicon::from_lines(const std::vector<std::string>& lines) {
  DirectionLexicon out;
  for (const auto& line : lines) {
    std::vector<std::string> parts;
    for (const auto& p : split(line, ' ')) {
      if (!trim(p).empty()) parts.push_back(trim(p));
    }
    if (parts.size() != 2) {
      throw Error(ErrorCode::malformed_input, "direction lexicon entry: " + line);
    }
    std::string dir = to_lower(parts[1]);
    if (dir == "increase") out.by_lemma_[to_lower(parts[0])] = Direction::INCREASE;
    else if (dir == "decrease") out.by_lemma_[to_lower(parts[0])] = Direction::DECREASE;
    else throw Error(ErrorCode::malformed_input, "direction must be increase/decrease: " + line);
  }
  return out;
}

std::optional<Direction> DirectionLexicon::of(std::string_view lemma) const {
  auto it = by_lemma_.find(to_lower(lemma));
  if (it == by_lemma_.end()) return std::nullopt;
  return it->second;
}

std::vector<extract::EntityMention> intersect_entities(
    const std::vector<extract::EntityMention>& custom,
    const std::vector<extract::EntityMention>& srl, const Rational& overlap_threshold) {
  if (overlap_threshold <= Rational(0, 1) || Rational(1, 1) < overlap_threshold) {
    throw Error(ErrorCode::invalid_threshold, overlap_threshold.to_string());
  }

  auto jaccard_meets = [&](const text::Span& a, const text::Span& b) {
    size_t inter_lo = std::max(a.start, b.start);
    size_t inter_hi = std::min(a.end, b.end);
    if (inter_hi <= inter_lo) return false;
    long long inter = static_cast<long long>(inter_hi - inter_lo);
    long long uni = static_cast<long long>(a.length() + b.length()) - inter;
    // inter/uni >= threshold, compared exactly.
    return Rational(inter, uni) >= overlap_threshold;
  };

  std::vector<extract::EntityMention> out;
  for (const auto& mention : custom) {
    bool validated = std::any_of(srl.begin(), srl.end(), [&](const extract::EntityMention& s) {
      return s.sentence_index == mention.sentence_index && jaccard_meets(mention.span, s.span);
    });
    if (validated) out.push_back(mention);
  }
  std::sort(out.begin(), out.end(), [](const extract::EntityMention& a, const extract::EntityMention& b) {
    if (a.span != b.span) return a.span < b.span;
    return static_cast<int>(a.entity_type) < static_cast<int>(b.entity_type);
  });
  return out;
}

namespace {

std::optional<Direction> direction_of_label(const DirectionLexicon& directions,
                                            std::string_view label) {
  // Fused labels ("comply_with") carry the verb in the first segment.
  size_t underscore = label.find('_');
  return directions.of(underscore == std::string_view::npos ? label : label.substr(0, underscore));
}

std::string quantity_text(const text::QuantityMention& q) {
  return q.value.to_string() + " " + text::to_string(q.unit);
}

}  // namespace

DataModelInstance fill_data_model(const ingest::Article& article,
                                  const std::vector<extract::EntityMention>& entities,
                                  const std::vector<relate::RelationTriple>& triples,
                                  const DirectionLexicon& directions,
                                  const extract::VerbLexicon& verbs,
                                  const text::ScaleLexicon& scales) {
  DataModelInstance out;
  out.article_id = article.id;
  out.triples = triples;

  std::vector<extract::EntityMention> ordered = entities;
  std::sort(ordered.begin(), ordered.end(),
            [](const extract::EntityMention& a, const extract::EntityMention& b) {
              if (a.span != b.span) return a.span < b.span;
              return static_cast<int>(a.entity_type) < static_cast<int>(b.entity_type);
            });

  for (const auto& m : ordered) {
    switch (m.entity_type) {
      case extract::EntityType::REGULATORY_AUTHORITY:
        if (!out.authority) out.authority = m.surface;
        break;
      case extract::EntityType::REGULATED_ENTITY:
        if (!out.regulated_entity) out.regulated_entity = m.surface;
        break;
      case extract::EntityType::REGULATED_ACTIVITY_THRESHOLD:
        if (!out.threshold) out.threshold = m.surface;
        break;
      case extract::EntityType::MONETARY_VALUE:
        if (!out.quantity) {
          if (m.quantity) {
            out.quantity = m.quantity;
          } else {
            // External mentions may arrive without a normalized payload.
            auto scan = text::normalize_quantities(text::tokenize(m.surface), scales);
            if (!scan.mentions.empty()) {
              out.quantity = scan.mentions.front();
              out.quantity->span = m.span;
            } else {
              out.diagnostics.push_back("unparseable quantity: " + m.surface);
            }
          }
        }
        break;
      case extract::EntityType::EFFECTIVE_DATE:
        if (!out.effective_date) {
          auto date = Date::parse_surface(m.surface);
          if (date) out.effective_date = *date;
          else out.diagnostics.push_back("unparseable date: " + m.surface);
        }
        break;
      case extract::EntityType::REGULATION_CITATION:
        if (!out.citation) out.citation = m.surface;
        break;
      case extract::EntityType::CHANGE_ACTION:
        if (out.direction == Direction::UNSPECIFIED) {
          if (auto d = directions.of(verbs.lemma_of(m.surface))) out.direction = *d;
        }
        break;
      case extract::EntityType::UNTYPED:
        break;
    }
  }

  if (out.direction == Direction::UNSPECIFIED) {
    for (const auto& t : triples) {
      if (t.provenance != relate::Provenance::VERB_PATH) continue;
      if (auto d = direction_of_label(directions, t.predicate_label)) {
        out.direction = *d;
        break;
      }
    }
  }

  if (!out.authority) out.diagnostics.push_back("missing slot: authority");
  if (!out.regulated_entity) out.diagnostics.push_back("missing slot: regulated_entity");
  if (!out.threshold) out.diagnostics.push_back("missing slot: threshold");
  if (!out.quantity) out.diagnostics.push_back("missing slot: quantity");
  if (out.direction == Direction::UNSPECIFIED) out.diagnostics.push_back("missing slot: direction");
  if (!out.effective_date) out.diagnostics.push_back("missing slot: effective_date");
  if (!out.citation) out.diagnostics.push_back("missing slot: citation");
  return out;
}

std::string slots_and_triples_text(const DataModelInstance& instance) {
  std::vector<std::string> parts;
  if (instance.authority) parts.push_back(*instance.authority);
  if (instance.regulated_entity) parts.push_back(*instance.regulated_entity);
  if (instance.threshold) parts.push_back(*instance.threshold);
  if (instance.quantity) parts.push_back(quantity_text(*instance.quantity));
  if (instance.direction != Direction::UNSPECIFIED) parts.push_back(to_string(instance.direction));
  if (instance.effective_date) parts.push_back(instance.effective_date->to_string());
  if (instance.citation) parts.push_back(*instance.citation);
  for (const auto& t : instance.triples) {
    parts.push_back(t.subject.surface + " " + t.predicate_label + " " + t.object.surface);
  }
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ' ';
    out += parts[i];
  }
  return out;
}

Rational summarization_ratio(const ingest::Article& article, const DataModelInstance& instance) {
  long long tokens_in = static_cast<long long>(text::tokenize(article.body_text).size());
  long long tokens_out =
      static_cast<long long>(text::tokenize(slots_and_triples_text(instance)).size());
  if (tokens_out < 1) tokens_out = 1;
  return Rational(tokens_in, tokens_out);
}

namespace {

json quantity_to_json(const text::QuantityMention& q) {
  json j;
  j["value"] = q.value.to_string();
  j["unit"] = text::to_string(q.unit);
  if (q.scale_word) j["scale_word"] = *q.scale_word;
  return j;
}

json mention_to_json(const extract::EntityMention& m) {
  json j;
  j["surface"] = m.surface;
  j["type"] = extract::to_string(m.entity_type);
  return j;
}

extract::EntityMention mention_from_json(const json& j) {
  extract::EntityMention m;
  if (!j.is_object() || !j.contains("surface") || !j.contains("type")) {
    throw Error(ErrorCode::malformed_input, "triple endpoint needs surface and type");
  }
  m.surface = j["surface"].get<std::string>();
  auto type = extract::entity_type_from_string(j["type"].get<std::string>());
  if (!type) throw Error(ErrorCode::malformed_input, "unknown entity type: " + j["type"].get<std::string>());
  m.entity_type = *type;
  return m;
}

}  // namespace

std::string instance_to_json(const DataModelInstance& instance) {
  json slots;  // nlohmann objects keep keys sorted
  if (instance.authority) slots["authority"] = *instance.authority;
  if (instance.regulated_entity) slots["regulated_entity"] = *instance.regulated_entity;
  if (instance.threshold) slots["threshold"] = *instance.threshold;
  if (instance.quantity) slots["quantity"] = quantity_to_json(*instance.quantity);
  if (instance.direction != Direction::UNSPECIFIED) slots["direction"] = to_string(instance.direction);
  if (instance.effective_date) slots["effective_date"] = instance.effective_date->to_string();
  if (instance.citation) slots["citation"] = *instance.citation;

  json triples = json::array();
  for (const auto& t : instance.triples) {
    json jt;
    jt["subject"] = mention_to_json(t.subject);
    jt["predicate"] = t.predicate_label;
    jt["object"] = mention_to_json(t.object);
    jt["sentence_index"] = t.sentence_index;
    jt["provenance"] = relate::to_string(t.provenance);
    triples.push_back(std::move(jt));
  }

  json j;
  j["article_id"] = instance.article_id;
  j["slots"] = std::move(slots);
  j["triples"] = std::move(triples);
  j["diagnostics"] = instance.diagnostics;
  return j.dump();
}

DataModelInstance instance_from_json(const std::string& raw_json) {
  json j;
  try {
    j = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_input, e.what());
  }
  if (!j.is_object() || !j.contains("article_id") || !j.contains("slots") || !j.contains("triples")) {
    throw Error(ErrorCode::malformed_input, "instance needs article_id, slots, triples");
  }
  DataModelInstance out;
  out.article_id = j["article_id"].get<std::string>();
  const json& slots = j["slots"];
  if (slots.contains("authority")) out.authority = slots["authority"].get<std::string>();
  if (slots.contains("regulated_entity")) out.regulated_entity = slots["regulated_entity"].get<std::string>();
  if (slots.contains("threshold")) out.threshold = slots["threshold"].get<std::string>();
  if (slots.contains("citation")) out.citation = slots["citation"].get<std::string>();
  if (slots.contains("direction")) {
    std::string d = slots["direction"].get<std::string>();
    if (d == "increase") out.direction = Direction::INCREASE;
    else if (d == "decrease") out.direction = Direction::DECREASE;
    else throw Error(ErrorCode::malformed_input, "unknown direction: " + d);
  }
  if (slots.contains("effective_date")) {
    auto date = Date::parse_iso(slots["effective_date"].get<std::string>());
    if (!date) throw Error(ErrorCode::malformed_input, "bad effective_date");
    out.effective_date = *date;
  }
  if (slots.contains("quantity")) {
    const json& q = slots["quantity"];
    text::QuantityMention qm;
    auto value = Decimal::parse(q.at("value").get<std::string>());
    if (!value) throw Error(ErrorCode::malformed_input, "bad quantity value");
    qm.value = *value;
    auto unit = text::unit_from_string(q.at("unit").get<std::string>());
    if (!unit) throw Error(ErrorCode::malformed_input, "bad quantity unit");
    qm.unit = *unit;
    if (q.contains("scale_word")) qm.scale_word = q["scale_word"].get<std::string>();
    out.quantity = qm;
  }
  for (const auto& jt : j["triples"]) {
    relate::RelationTriple t;
    t.subject = mention_from_json(jt.at("subject"));
    t.object = mention_from_json(jt.at("object"));
    t.predicate_label = jt.at("predicate").get<std::string>();
    t.sentence_index = jt.at("sentence_index").get<size_t>();
    std::string prov = jt.at("provenance").get<std::string>();
    if (prov == "verb_path") t.provenance = relate::Provenance::VERB_PATH;
    else if (prov == "clause_svo") t.provenance = relate::Provenance::CLAUSE_SVO;
    else throw Error(ErrorCode::malformed_input, "unknown provenance: " + prov);
    t.article_id = out.article_id;
    out.triples.push_back(std::move(t));
  }
  if (j.contains("diagnostics")) {
    for (const auto& d : j["diagnostics"]) out.diagnostics.push_back(d.get<std::string>());
  }
  return out;
}

PipelineResult run_pipeline(const ingest::Article& article, const PipelineConfig& config,
                            const extract::ExternalAnnotations* annotations) {
  auto sentences = text::segment_sentences(article.body_text, config.abbreviations);

  std::vector<extract::EntityMention> custom;
  std::vector<extract::EntityMention> srl;
  if (annotations) {
    for (const auto& m : annotations->mentions) {
      (m.stream == extract::Stream::CUSTOM ? custom : srl).push_back(m);
    }
    auto from_frames =
        extract::frames_to_entities(annotations->frames, article, sentences, config.rules);
    srl.insert(srl.end(), from_frames.begin(), from_frames.end());
  } else {
    custom = extract::extract_entities(article, sentences, config.rules);
    auto frames = extract::extract_frames(article, sentences, config.rules.verbs);
    srl = extract::frames_to_entities(frames, article, sentences, config.rules);
  }

  auto surviving = intersect_entities(custom, srl, config.overlap_threshold);
  auto deduped = relate::dedupe_mentions(surviving);

  std::vector<relate::RelationTriple> triples;
  for (const auto& [a, b] : relate::enumerate_pairs(deduped)) {
    auto found = relate::extract_relations(article, sentences, a, b, config.rules.verbs,
                                           config.prepositions);
    triples.insert(triples.end(), found.begin(), found.end());
  }
  for (const auto& sentence : sentences) {
    auto found = relate::clause_svo(article, sentence, config.rules.verbs);
    triples.insert(triples.end(), found.begin(), found.end());
  }

  PipelineResult result;
  result.instance = fill_data_model(article, surviving, triples, config.directions,
                                    config.rules.verbs, config.rules.scales);
  result.ratio = summarization_ratio(article, result.instance);
  return result;
}

}  // namespace regwatch::fuse
