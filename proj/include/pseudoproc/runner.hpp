#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pseudoproc/config.hpp"

namespace pseudoproc {

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::vector<std::string> outputs;  // file names inside the output directory
  std::int64_t wall_time_ms = 0;
  bool all_passed = true;  // conjunction of verdicts; true when none

  nlohmann::json to_json() const;
};

/// Executes the experiment, writes result files plus manifest.json into the
/// config's output directory, and returns the manifest. Identical configs
/// produce byte-identical result files (the manifest's wall time aside).
RunManifest run(const ExperimentConfig& cfg);
RunManifest run_config_text(const std::string& text);
RunManifest run_config_file(const std::string& path);

/// One line per runnable check: name, a tab, and a short description.
std::string list_checks_text();

}  // namespace pseudoproc
