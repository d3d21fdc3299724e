#pragma once

// JSON run configuration shared by the simulate and analyze commands. One
// flat schema: simulate ignores B (bootstrap size), analyze ignores J. All
// keys are optional with the documented defaults; unknown keys are rejected
// with a nearest-known-key suggestion.

#include <string>
#include <vector>

#include "un/simulation.hpp"

namespace un {

struct RunConfig {
  SimConfig sim;               // carries match/mcmc/mle sub-options too
  std::string output_dir = ".";
  std::string format = "csv";  // auxiliary table format: csv | json
};

struct ConfigLoadResult {
  RunConfig config;
  std::vector<std::string> problems;  // all violations, empty means valid
};

// Throws SchemaError only on an unreadable file or malformed JSON syntax;
// content problems (unknown keys, wrong types, out-of-range values) are
// collected so callers can report every one.
ConfigLoadResult load_config(const std::string& path);

// Convenience: throws SchemaError listing all problems.
RunConfig load_valid_config(const std::string& path);

}  // namespace un
