#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakal/harness.hpp"

namespace weakal {

// Parses the key=value section format (see README for the schema); unknown
// keys and invariant violations raise ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Applies "section.key=value" overrides on top of a parsed config.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Canonical textual form; parse(emit(cfg)) round-trips to an equivalent
// config, and the run manifest hashes this text.
std::string emit_config(const ExperimentConfig& cfg);

// FNV-1a 64 over the canonical config text.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace weakal
