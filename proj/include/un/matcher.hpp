#pragma once

// Matched-sample construction on estimated propensity scores: common-support
// trimming, 1:1 nearest-neighbor with replacement, and without-replacement
// random matching inside a caliper.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "un/rng.hpp"

namespace un {

struct MatchSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (treated, control)
  std::vector<std::size_t> matched_controls;  // with multiplicity, one per pair
  std::vector<std::size_t> dropped_treated;
  std::vector<std::size_t> dropped_controls;
  std::optional<double> caliper_used;  // absolute width when a caliper applied
};

// Indices of controls whose score lies inside the closed [min, max] range of
// the treated scores. Treated units are never dropped here.
std::vector<std::size_t> trim_common_support(std::span<const double> score,
                                             std::span<const double> z);

// 1:1 nearest neighbor, controls reusable. Treated units are processed in
// rng-shuffled order; exact distance ties are broken uniformly at random.
// control_idx must already be trimmed to common support by the caller.
MatchSet match_with_replacement(std::span<const std::size_t> treated_idx,
                                std::span<const std::size_t> control_idx,
                                std::span<const double> score, Rng& rng);

// Without replacement: treated units in rng-shuffled order each draw one
// control uniformly at random from the not-yet-matched controls within
// caliper_sd standard deviations (SD over the pooled treated + control
// scores passed in). Treated units with no candidate are dropped, never an
// error.
MatchSet match_no_replacement_caliper(std::span<const std::size_t> treated_idx,
                                      std::span<const std::size_t> control_idx,
                                      std::span<const double> score,
                                      double caliper_sd, Rng& rng);

struct MatchFrequency {
  std::vector<double> fraction;        // per unit: share of matchsets it is in
  double pct_matched_at_least_once;    // over all n_units, in percent
};

MatchFrequency match_frequency(const std::vector<MatchSet>& matchsets,
                               std::size_t n_units);

}  // namespace un
