#include "regwatch/config.hpp"

#include <filesystem>

#include <json.hpp>

#include "regwatch/errors.hpp"
#include "regwatch/textfile.hpp"

namespace regwatch {

namespace fs = std::filesystem;
using nlohmann::json;

AppConfig load_app_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_error, std::string(e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::config_error, "config must be a JSON object");

  fs::path base = fs::path(path).parent_path();
  if (j.contains("data_dir")) {
    fs::path data_dir = j["data_dir"].get<std::string>();
    base = data_dir.is_absolute() ? data_dir : base / data_dir;
  }

  auto file = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::config_error, std::string("missing path: ") + key);
    }
    fs::path p = j[key].get<std::string>();
    return (p.is_absolute() ? p : base / p).string();
  };
  auto optional_file = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return file(key);
  };

  AppConfig out;
  try {
    out.pipeline.abbreviations = text::AbbreviationSet::load(file("abbreviations"));
    out.pipeline.rules.scales = text::ScaleLexicon::load(file("scale_words"));
    out.pipeline.rules.verbs = extract::VerbLexicon::load(file("verbs"));
    out.pipeline.rules.gazetteer = extract::Gazetteer::load(file("gazetteer"));
    out.pipeline.rules.date_patterns = extract::PatternSet::load(file("date_patterns"));
    out.pipeline.rules.citation_patterns = extract::PatternSet::load(file("citation_patterns"));
    out.pipeline.directions = fuse::DirectionLexicon::load(file("direction"));
    out.aliases = kg::AliasMap::load(file("aliases"));
    out.nic_kinds = ingest::EntityKindTable::load(file("nic_entity_kinds"));

    for (const auto& lemma : read_data_lines(file("change_verbs"))) {
      out.pipeline.rules.change_verbs.insert(to_lower(lemma));
    }
    for (const auto& word : read_data_lines(file("prepositions"))) {
      out.pipeline.prepositions.insert(to_lower(word));
    }

    // The gazetteer is bootstrapped from institution names when a registry
    // extract is configured.
    if (auto nic = optional_file("gazetteer_nic_csv")) {
      auto records = ingest::parse_nic_csv(read_file(*nic), out.nic_kinds);
      out.pipeline.rules.gazetteer.add_institutions(records);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    throw Error(ErrorCode::config_error, e.what());
  }

  if (j.contains("overlap_threshold")) {
    std::string raw = j["overlap_threshold"].is_string()
                          ? j["overlap_threshold"].get<std::string>()
                          : j["overlap_threshold"].dump();
    auto value = Decimal::parse(raw);
    if (!value) throw Error(ErrorCode::config_error, "bad overlap_threshold: " + raw);
    out.pipeline.overlap_threshold = Rational::from_decimal(*value);
  }

  auto columns = [&](const char* key, std::vector<std::string>& target) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw Error(ErrorCode::config_error, std::string(key) + " must be an array");
    target.clear();
    for (const auto& c : j[key]) target.push_back(c.get<std::string>());
  };
  columns("nic_regulator_columns", out.nic_links.regulator_columns);
  columns("nic_insurer_columns", out.nic_links.insurer_columns);

  return out;
}

}  // namespace regwatch
