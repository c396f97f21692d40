#pragma once

#include <cstdint>
#include <string>

#include "seqnav/env.hpp"
#include "seqnav/ppo.hpp"

namespace seqnav {

/// Curriculum schedule knobs that live outside the environment (the range
/// endpoints themselves sit in EnvConfig::curriculum_ranges).
struct CurriculumConfig {
    bool enabled = true;
    double c_init = 0.0;
    std::size_t window = 1000;        // W, rolling outcome count
    std::size_t update_period = 10;   // iterations between updates
    double delta_c = 0.05;
    double expand_threshold = 0.8;
    double contract_threshold = 0.2;
};

/// Complete training configuration. Every field maps to one key in the
/// key=value config format (see serialize_config for the canonical list).
struct TrainConfig {
    EnvConfig env;
    PpoConfig ppo;
    CurriculumConfig curriculum;
    std::size_t checkpoint_interval = 200;  // iterations; 0 = final only
};

/// Parse a config file: one `key = value` pair per line, `#` comments,
/// blank lines ignored. Unknown keys and malformed values throw
/// std::runtime_error naming the offending line.
TrainConfig parse_config_file(const std::string& path);

/// Apply one key/value pair on top of an existing config.
void apply_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Canonical text: every key in a fixed order with full double precision.
/// parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const TrainConfig& cfg);

/// FNV-1a hash of the canonical text; checkpoints carry it so a resumed run
/// can verify it is continuing under the same configuration.
std::uint64_t config_hash(const TrainConfig& cfg);

}  // namespace seqnav
