#pragma once

#include <string>

#include "regwatch/fuse.hpp"
#include "regwatch/kgraph.hpp"

namespace regwatch {

// Everything the pipeline and graph commands need, loaded from one JSON
// config file. Relative paths resolve against the config file's directory
// (then data_dir). Rules and taxonomy files are command arguments, not
// config.
struct AppConfig {
  fuse::PipelineConfig pipeline;
  kg::AliasMap aliases;
  ingest::EntityKindTable nic_kinds;
  kg::NicLinkColumns nic_links;
};

AppConfig load_app_config(const std::string& path);

}  // namespace regwatch
