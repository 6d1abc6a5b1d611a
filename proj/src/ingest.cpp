#include "regwatch/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "regwatch/errors.hpp"
#include "regwatch/textcore.hpp"
#include "regwatch/textfile.hpp"

// httplib is only needed for the live-fetch path.
#include <httplib.h>

namespace regwatch::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(InstitutionKind kind) {
  switch (kind) {
    case InstitutionKind::BANK: return "BANK";
    case InstitutionKind::BANK_BRANCH: return "BANK_BRANCH";
    case InstitutionKind::HOLDING_COMPANY: return "HOLDING_COMPANY";
    case InstitutionKind::REGULATOR: return "REGULATOR";
    case InstitutionKind::INSURER: return "INSURER";
  }
  return "BANK";
}

namespace {

std::optional<InstitutionKind> kind_from_name(const std::string& name) {
  if (name == "BANK") return InstitutionKind::BANK;
  if (name == "BANK_BRANCH") return InstitutionKind::BANK_BRANCH;
  if (name == "HOLDING_COMPANY") return InstitutionKind::HOLDING_COMPANY;
  if (name == "REGULATOR") return InstitutionKind::REGULATOR;
  if (name == "INSURER") return InstitutionKind::INSURER;
  return std::nullopt;
}

Article article_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::malformed_input, "article is not a JSON object");
  for (const char* key : {"id", "title", "publication_date", "agencies", "body"}) {
    if (!j.contains(key)) throw Error(ErrorCode::missing_field, key);
  }
  Article a;
  if (!j["id"].is_string()) throw Error(ErrorCode::malformed_input, "id must be a string");
  a.id = j["id"].get<std::string>();
  if (a.id.empty()) throw Error(ErrorCode::malformed_input, "id is empty");
  if (!j["title"].is_string()) throw Error(ErrorCode::malformed_input, "title must be a string");
  a.title = j["title"].get<std::string>();
  if (!j["publication_date"].is_string()) {
    throw Error(ErrorCode::malformed_input, "publication_date must be a string");
  }
  auto date = Date::parse_iso(j["publication_date"].get<std::string>());
  if (!date) {
    throw Error(ErrorCode::malformed_input,
                "publication_date is not an ISO-8601 date: " +
                    j["publication_date"].get<std::string>());
  }
  a.publication_date = *date;
  if (!j["agencies"].is_array()) throw Error(ErrorCode::malformed_input, "agencies must be an array");
  for (const auto& agency : j["agencies"]) {
    if (!agency.is_string()) throw Error(ErrorCode::malformed_input, "agencies entries must be strings");
    a.agency_names.push_back(agency.get<std::string>());
  }
  if (!j["body"].is_string()) throw Error(ErrorCode::malformed_input, "body must be a string");
  a.body_text = text::normalize_whitespace(j["body"].get<std::string>());
  if (a.body_text.empty()) throw Error(ErrorCode::empty_body, "article " + a.id);
  return a;
}

}  // namespace

Article parse_article(const std::string& raw_json) {
  json j;
  try {
    j = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_input, e.what());
  }
  return article_from_json(j);
}

std::string article_to_json(const Article& article) {
  json j;
  j["id"] = article.id;
  j["title"] = article.title;
  j["publication_date"] = article.publication_date.to_string();
  j["agencies"] = article.agency_names;
  j["body"] = article.body_text;
  return j.dump();
}

EntityKindTable EntityKindTable::load(const std::string& path) {
  return from_lines(read_data_lines(path));
}

EntityKindTable EntityKindTable::from_lines(const std::vector<std::string>& lines) {
  EntityKindTable out;
  for (const auto& line : lines) {
    auto parts = split(line, '\t');
    if (parts.size() != 2) {
      throw Error(ErrorCode::malformed_input, "entity kind table entry: " + line);
    }
    auto kind = kind_from_name(trim(parts[1]));
    if (!kind) throw Error(ErrorCode::malformed_input, "unknown kind name: " + parts[1]);
    out.kinds_[trim(parts[0])] = *kind;
  }
  return out;
}

InstitutionKind EntityKindTable::kind_of(const std::string& entity_type) const {
  auto it = kinds_.find(entity_type);
  if (it == kinds_.end()) throw Error(ErrorCode::unknown_entity_type, entity_type);
  return it->second;
}

namespace {

// RFC 4180 record reader. Returns false at end of input. `line` tracks the
// physical line the record starts on, for error messages.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  bool next_record(std::vector<std::string>& fields, size_t& record_line) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    record_line = line_;
    std::string field;
    bool in_quotes = false;
    bool record_done = false;
    while (!record_done) {
      if (pos_ >= text_.size()) {
        if (in_quotes) {
          throw Error(ErrorCode::malformed_input,
                      "line " + std::to_string(record_line) + ": unterminated quoted field");
        }
        fields.push_back(std::move(field));
        return true;
      }
      char c = text_[pos_++];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
      } else if (c == '"' && field.empty()) {
        in_quotes = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        ++line_;
        fields.push_back(std::move(field));
        record_done = true;
      } else if (c == '\n') {
        ++line_;
        fields.push_back(std::move(field));
        record_done = true;
      } else {
        field.push_back(c);
      }
    }
    return true;
  }

  bool at_end() const { return pos_ >= text_.size(); }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  size_t line_ = 1;
};

}  // namespace

std::vector<InstitutionRecord> parse_nic_csv(const std::string& raw_csv,
                                             const EntityKindTable& kinds) {
  CsvReader reader(raw_csv);
  std::vector<std::string> header;
  size_t line = 0;
  if (!reader.next_record(header, line)) {
    throw Error(ErrorCode::malformed_input, "empty CSV");
  }
  for (auto& h : header) h = trim(h);

  auto column = [&](const char* name) -> std::optional<size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<size_t>(it - header.begin());
  };
  auto require = [&](const char* name) -> size_t {
    auto idx = column(name);
    if (!idx) throw Error(ErrorCode::malformed_input, std::string("missing column: ") + name);
    return *idx;
  };

  size_t id_col = require("ID_RSSD");
  size_t name_col = require("NAME");
  size_t type_col = require("ENTITY_TYPE");
  std::optional<size_t> parent_col = column("PARENT_RSSD");

  std::vector<InstitutionRecord> out;
  std::vector<std::string> fields;
  while (reader.next_record(fields, line)) {
    if (fields.size() == 1 && fields[0].empty() && reader.at_end()) break;  // trailing newline
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::malformed_input,
                  "line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    InstitutionRecord rec;
    rec.rssd_id = fields[id_col];
    if (rec.rssd_id.empty()) {
      throw Error(ErrorCode::malformed_input, "line " + std::to_string(line) + ": empty ID_RSSD");
    }
    rec.name = fields[name_col];
    rec.kind = kinds.kind_of(fields[type_col]);
    if (parent_col && !fields[*parent_col].empty()) {
      rec.parent_rssd_id = fields[*parent_col];
      if (*rec.parent_rssd_id == rec.rssd_id) {
        throw Error(ErrorCode::malformed_input,
                    "line " + std::to_string(line) + ": PARENT_RSSD equals ID_RSSD");
      }
    }
    for (size_t i = 0; i < header.size(); ++i) {
      if (i == id_col || i == name_col || i == type_col) continue;
      if (parent_col && i == *parent_col) continue;
      rec.properties[header[i]] = fields[i];
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

// Just enough XML for the CFR extract: one root, nested elements, attributes,
// comments, the five named entities. No DTDs, no CDATA, no namespaces.
class XmlParser {
 public:
  struct Element {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<Element> children;
    // texts[i] is the character data before children[i]; texts.back() is the
    // data after the last child, so document order is recoverable.
    std::vector<std::string> texts = {""};
  };

  explicit XmlParser(std::string_view text) : text_(text) {}

  Element parse_document() {
    skip_misc();
    if (pos_ >= text_.size() || text_[pos_] != '<') {
      throw Error(ErrorCode::malformed_input, "no root element");
    }
    Element root = parse_element();
    skip_misc();
    if (pos_ < text_.size()) {
      throw Error(ErrorCode::malformed_input, "trailing content after root element");
    }
    return root;
  }

 private:
  void skip_whitespace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void skip_misc() {
    while (true) {
      skip_whitespace();
      if (text_.compare(pos_, 2, "<?") == 0) {
        size_t end = text_.find("?>", pos_);
        if (end == std::string_view::npos) throw Error(ErrorCode::malformed_input, "unterminated processing instruction");
        pos_ = end + 2;
      } else if (text_.compare(pos_, 4, "<!--") == 0) {
        size_t end = text_.find("-->", pos_);
        if (end == std::string_view::npos) throw Error(ErrorCode::malformed_input, "unterminated comment");
        pos_ = end + 3;
      } else if (text_.compare(pos_, 2, "<!") == 0) {
        size_t end = text_.find('>', pos_);
        if (end == std::string_view::npos) throw Error(ErrorCode::malformed_input, "unterminated declaration");
        pos_ = end + 1;
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '-' || text_[pos_] == '.' || text_[pos_] == ':')) {
      ++pos_;
    }
    if (start == pos_) throw Error(ErrorCode::malformed_input, "expected name at offset " + std::to_string(pos_));
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string decode_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) throw Error(ErrorCode::malformed_input, "unterminated entity");
      std::string_view entity = raw.substr(i + 1, semi - i - 1);
      if (entity == "amp") out.push_back('&');
      else if (entity == "lt") out.push_back('<');
      else if (entity == "gt") out.push_back('>');
      else if (entity == "quot") out.push_back('"');
      else if (entity == "apos") out.push_back('\'');
      else throw Error(ErrorCode::malformed_input, "unknown entity: &" + std::string(entity) + ";");
      i = semi;
    }
    return out;
  }

  Element parse_element() {
    // pos_ is at '<'
    ++pos_;
    Element el;
    el.name = parse_name();
    while (true) {
      skip_whitespace();
      if (pos_ >= text_.size()) throw Error(ErrorCode::malformed_input, "unterminated tag: " + el.name);
      if (text_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (text_.compare(pos_, 2, "/>") == 0) {
        pos_ += 2;
        return el;
      }
      std::string attr = parse_name();
      skip_whitespace();
      if (pos_ >= text_.size() || text_[pos_] != '=') {
        throw Error(ErrorCode::malformed_input, "attribute without value: " + attr);
      }
      ++pos_;
      skip_whitespace();
      if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) {
        throw Error(ErrorCode::malformed_input, "unquoted attribute value: " + attr);
      }
      char quote = text_[pos_++];
      size_t end = text_.find(quote, pos_);
      if (end == std::string_view::npos) {
        throw Error(ErrorCode::malformed_input, "unterminated attribute value: " + attr);
      }
      el.attributes[attr] = decode_entities(text_.substr(pos_, end - pos_));
      pos_ = end + 1;
    }
    // Content until matching close tag.
    while (true) {
      if (pos_ >= text_.size()) throw Error(ErrorCode::malformed_input, "missing close tag: " + el.name);
      if (text_.compare(pos_, 4, "<!--") == 0) {
        size_t end = text_.find("-->", pos_);
        if (end == std::string_view::npos) throw Error(ErrorCode::malformed_input, "unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (text_.compare(pos_, 2, "</") == 0) {
        pos_ += 2;
        std::string close = parse_name();
        if (close != el.name) {
          throw Error(ErrorCode::malformed_input,
                      "mismatched close tag: expected </" + el.name + ">, got </" + close + ">");
        }
        skip_whitespace();
        if (pos_ >= text_.size() || text_[pos_] != '>') {
          throw Error(ErrorCode::malformed_input, "malformed close tag: " + close);
        }
        ++pos_;
        return el;
      }
      if (text_[pos_] == '<') {
        el.children.push_back(parse_element());
        el.texts.emplace_back();
        continue;
      }
      size_t next = text_.find('<', pos_);
      if (next == std::string_view::npos) throw Error(ErrorCode::malformed_input, "missing close tag: " + el.name);
      el.texts.back() += decode_entities(text_.substr(pos_, next - pos_));
      pos_ = next;
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
};

void flatten_text(const XmlParser::Element& el, std::string& out) {
  for (size_t i = 0; i < el.children.size(); ++i) {
    out += el.texts[i];
    flatten_text(el.children[i], out);
  }
  out += el.texts.back();
}

}  // namespace

std::vector<RegulationSection> parse_cfr_xml(const std::string& raw_xml) {
  XmlParser parser(raw_xml);
  XmlParser::Element root = parser.parse_document();

  std::vector<RegulationSection> out;
  std::set<std::string> seen;
  for (const auto& child : root.children) {
    if (child.name != "section") continue;
    auto attr = child.attributes.find("citation");
    if (attr == child.attributes.end()) {
      throw Error(ErrorCode::malformed_input, "section without citation attribute");
    }
    RegulationSection section;
    section.citation = attr->second;
    if (section.citation.empty()) {
      throw Error(ErrorCode::malformed_input, "section with empty citation");
    }
    if (!seen.insert(section.citation).second) {
      throw Error(ErrorCode::duplicate_citation, section.citation);
    }
    std::string body;
    bool heading_taken = false;
    for (size_t i = 0; i < child.children.size(); ++i) {
      body += child.texts[i];
      const auto& grand = child.children[i];
      if (grand.name == "heading" && !heading_taken) {
        std::string heading;
        flatten_text(grand, heading);
        section.heading = text::normalize_whitespace(heading);
        heading_taken = true;
        continue;
      }
      flatten_text(grand, body);
    }
    body += child.texts.back();
    section.text = text::normalize_whitespace(body);
    out.push_back(std::move(section));
  }
  return out;
}

namespace {

FetchResult fetch_from_directory(const fs::path& dir, const Date& since) {
  FetchResult out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    try {
      Article a = parse_article(read_file(file.string()));
      if (a.publication_date < since) continue;
      out.articles.push_back(std::move(a));
    } catch (const Error& e) {
      out.skipped.push_back(file.filename().string() + ": " + e.what());
    }
  }
  return out;
}

FetchResult fetch_from_url(const std::string& url, const Date& since) {
  // http://host[:port]/path
  const std::string prefix = "http://";
  std::string rest = url.substr(prefix.size());
  size_t slash = rest.find('/');
  std::string host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
  std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
  std::string host = host_port;
  int port = 80;
  if (size_t colon = host_port.find(':'); colon != std::string::npos) {
    host = host_port.substr(0, colon);
    port = std::stoi(host_port.substr(colon + 1));
  }

  httplib::Client client(host, port);
  std::string query = path + (path.find('?') == std::string::npos ? "?" : "&") +
                      "since=" + since.to_string();
  auto res = client.Get(query);
  if (!res) throw Error(ErrorCode::source_unavailable, url + ": no response");
  if (res->status != 200) {
    throw Error(ErrorCode::source_unavailable, url + ": HTTP " + std::to_string(res->status));
  }

  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::source_unavailable, url + ": " + e.what());
  }
  if (!body.is_array()) throw Error(ErrorCode::source_unavailable, url + ": expected JSON array");

  FetchResult out;
  size_t index = 0;
  for (const auto& item : body) {
    try {
      Article a = article_from_json(item);
      if (a.publication_date < since) continue;
      out.articles.push_back(std::move(a));
    } catch (const Error& e) {
      out.skipped.push_back("item " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return out;
}

}  // namespace

FetchResult fetch_updates(const std::string& source, const Date& since) {
  FetchResult out;
  if (source.rfind("http://", 0) == 0) {
    out = fetch_from_url(source, since);
  } else if (source.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::source_unavailable, "https sources are not supported in this build");
  } else if (fs::is_directory(source)) {
    out = fetch_from_directory(source, since);
  } else {
    throw Error(ErrorCode::source_unavailable, "no such source: " + source);
  }

  std::sort(out.articles.begin(), out.articles.end(), [](const Article& a, const Article& b) {
    if (a.publication_date != b.publication_date) return a.publication_date < b.publication_date;
    return a.id < b.id;
  });
  // Duplicate ids: keep the first, report the rest.
  std::set<std::string> ids;
  std::vector<Article> unique;
  for (auto& a : out.articles) {
    if (!ids.insert(a.id).second) {
      out.skipped.push_back("duplicate article id: " + a.id);
      continue;
    }
    unique.push_back(std::move(a));
  }
  out.articles = std::move(unique);
  return out;
}

}  // namespace regwatch::ingest
