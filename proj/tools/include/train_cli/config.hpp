#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "train/simulator.hpp"

namespace train::cli {

/// Parses a scenario document. Omitted fields keep their defaults; unknown
/// keys and ill-typed values throw ConfigError naming the field (and the line
/// for syntax errors).
Scenario parse_config(std::string_view text);
Scenario load_config(const std::string& path);

/// Applies TRAIN_SEED if set. Accepts decimal or 0x-prefixed hex.
void apply_seed_override(Scenario& s, const char* env_value);

/// Human-readable notes about timing values the link model cannot honour.
std::vector<std::string> feasibility_warnings(const Scenario& s);

}  // namespace train::cli
