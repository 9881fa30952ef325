#pragma once

#include "scpdock/continuation.hpp"
#include "scpdock/ptr.hpp"
#include "scpdock/rendezvous.hpp"

#include <stdexcept>
#include <string>

namespace scpdock {

/// Everything a `solve` run needs. Angles in the file are degrees; they are
/// converted to radians on load.
struct RunConfig {
    ScenarioConfig scenario;
    HomotopyParams homotopy;
    PtrConfig ptr;
    int dense_samples = 10;  // propagation samples per segment in the artifacts
};

/// Malformed, incomplete or inconsistent configuration. The message names the
/// offending key with its dotted path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a YAML document. Every vehicle, orbit and scenario key is required;
/// homotopy, ptr, solver and output keys fall back to library defaults.
/// Unknown keys are rejected.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

/// YAML rendering of a configuration that parse_config reads back to the
/// same values.
std::string dump_config(const RunConfig& cfg);

}  // namespace scpdock
