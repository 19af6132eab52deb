#pragma once

#include <stdexcept>
#include <string>

#include "sdm/map_update.hpp"
#include "sdm/pipeline.hpp"

namespace sdm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a full run needs beyond the dataset itself. Defaults mirror
// the struct defaults of the individual modules.
struct RunConfig {
  MapUpdateParams map;
  PipelineConfig pipeline;
  int keyframe_interval = 10;  // promote every Nth frame to keyframe
};

// "key = value" per line, '#' comments, blank lines ignored. Unknown keys
// raise ConfigError; so do unparsable values.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);

}  // namespace sdm
