#pragma once

// End-to-end runs shared by the simulation harness, the bootstrap, and the
// CLI: point-estimate matching (fit once, match once) and posterior matching
// (fit by MCMC, match once per draw).

#include <cstdint>
#include <vector>

#include "un/dataset.hpp"
#include "un/estimator.hpp"
#include "un/matcher.hpp"
#include "un/propensity.hpp"

namespace un {

struct PsmRun {
  PropensityFit fit;
  PropensityScores scores;
  MatchSet matchset;   // dropped_controls includes trimmed controls
  AttPoint att;
};

PsmRun run_psm(const Dataset& data, const MatchOptions& match_opts,
               const MleOptions& mle_opts, std::uint64_t match_seed);

struct BpsmRun {
  PosteriorDraws draws;
  std::vector<MatchSet> matchsets;  // one per draw
  AttPosterior att;
};

// Support is re-trimmed per draw since the bounds move with the sampled
// coefficients. Per-draw matching streams derive from (seed, draw index), so
// any worker count gives identical results.
BpsmRun run_bpsm(const Dataset& data, const MatchOptions& match_opts,
                 const McmcConfig& mcmc, const MleOptions& mle_opts,
                 std::uint64_t seed, int workers = 1);

}  // namespace un
