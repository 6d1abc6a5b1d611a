#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regwatch/date.hpp"

namespace regwatch::ingest {

struct Article {
  std::string id;
  std::string title;
  Date publication_date;
  std::vector<std::string> agency_names;
  std::string body_text;  // whitespace-normalized, non-empty
};

enum class InstitutionKind { BANK, BANK_BRANCH, HOLDING_COMPANY, REGULATOR, INSURER };

const char* to_string(InstitutionKind kind);

struct InstitutionRecord {
  std::string rssd_id;
  std::string name;
  InstitutionKind kind = InstitutionKind::BANK;
  std::optional<std::string> parent_rssd_id;
  std::map<std::string, std::string> properties;  // unrecognized columns, verbatim
};

struct RegulationSection {
  std::string citation;
  std::string heading;
  std::string text;
};

// ENTITY_TYPE column value -> kind. Shipped as a data file; unmapped values
// are an error, not a silent drop.
class EntityKindTable {
 public:
  static EntityKindTable load(const std::string& path);
  static EntityKindTable from_lines(const std::vector<std::string>& lines);
  InstitutionKind kind_of(const std::string& entity_type) const;  // throws UnknownEntityType

 private:
  std::map<std::string, InstitutionKind> kinds_;
};

// Flat JSON object {id, title, publication_date, agencies:[...], body}.
Article parse_article(const std::string& raw_json);
std::string article_to_json(const Article& article);  // canonical, sorted keys

// RFC 4180 CSV, header first; requires ID_RSSD, NAME, ENTITY_TYPE columns.
std::vector<InstitutionRecord> parse_nic_csv(const std::string& raw_csv,
                                             const EntityKindTable& kinds);

// <section citation="..."><heading>..</heading>text</section> elements under
// one root; nested markup flattens to plain text.
std::vector<RegulationSection> parse_cfr_xml(const std::string& raw_xml);

struct FetchResult {
  std::vector<Article> articles;  // publication_date >= since, sorted, unique ids
  std::vector<std::string> skipped;  // per-document problems, reported not fatal
};

// Directory path -> offline fixture mode (byte-deterministic); http:// URL ->
// live GET with a `since` query parameter returning a JSON array of articles.
FetchResult fetch_updates(const std::string& source, const Date& since);

}  // namespace regwatch::ingest
