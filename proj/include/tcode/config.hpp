#pragma once

#include <string>

#include "tcode/harness.hpp"

namespace tcode {

/// Parses the `key = value` / `[section]` format. Sections: topology, link,
/// traffic, code, run. Unknown, duplicate, or misplaced keys are errors, as is
/// any value that fails ExperimentConfig::validate(). Throws ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Renders every setting, defaults included, in the same format.
/// parse_config_text(render_config(c)) reproduces c exactly.
std::string render_config(const ExperimentConfig& config);

/// Documented defaults, for --help.
std::string config_reference();

}  // namespace tcode
