#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "pistam/loop.hpp"

namespace pistam {

// Raised on malformed config text, unknown keys, or unreadable files.
// The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` text with [run], [search] and [env] sections. Unknown
// sections or keys are errors. A [cli] section is accepted and returned
// verbatim so that command snapshots can be re-fed as configs.
RunConfig parse_run_config(const std::string& text,
                           std::map<std::string, std::string>* cli_section = nullptr);

// Every key, every section, canonical order; %.17g floats. Reparsing yields
// an identical config.
std::string serialize_run_config(const RunConfig& cfg,
                                 const std::map<std::string, std::string>& cli_section = {});

RunConfig load_run_config(const std::string& path,
                          std::map<std::string, std::string>* cli_section = nullptr);
void save_run_config(const RunConfig& cfg, const std::string& path,
                     const std::map<std::string, std::string>& cli_section = {});

}  // namespace pistam
