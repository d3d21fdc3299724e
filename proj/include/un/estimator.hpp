#pragma once

// ATT computation from matched samples, bootstrap standard errors for the
// point-estimate pipeline, posterior ATT summaries, and the drop/keep
// diagnostic export.

#include <cstdint>
#include <vector>

#include "un/dataset.hpp"
#include "un/matcher.hpp"
#include "un/propensity.hpp"

namespace un {

// How a control matched to several treated units enters the control mean:
// once per pairing (the mean of per-pair differences) or once in total.
enum class ControlWeighting { multiplicity, unique };

struct MatchOptions {
  bool with_replacement = true;
  double caliper_sd = 0.5;   // only used without replacement
  bool match_on_linear_predictor = false;  // match on eta instead of ps
  ControlWeighting weighting = ControlWeighting::multiplicity;
};

struct AttPoint {
  double att = 0.0;  // = p1 - p0 exactly
  double p1 = 0.0;   // mean outcome over the original treated group
  double p0 = 0.0;   // mean matched-control outcome
  std::size_t n_treated = 0;           // all treated units, matched or not
  std::size_t n_matched_controls = 0;  // distinct controls in the matchset
};

AttPoint att_point(const MatchSet& ms, const Dataset& data,
                   ControlWeighting weighting = ControlWeighting::multiplicity);

struct AttPosterior {
  std::vector<double> sample;  // ATT per draw
  double mean = 0.0;
  double sd = 0.0;
  double ci_lo = 0.0;  // 2.5 percentile
  double ci_hi = 0.0;  // 97.5 percentile
};

AttPosterior att_posterior(const std::vector<MatchSet>& matchsets,
                           const Dataset& data,
                           ControlWeighting weighting = ControlWeighting::multiplicity);

AttPosterior summarize_att_sample(std::vector<double> sample);

struct BootstrapSe {
  double se = 0.0;
  std::size_t B = 0;                // requested replicate count
  std::vector<double> replicates;   // successful replicates only
  std::size_t failed = 0;
};

// Resamples whole observations with replacement and re-runs the full
// point-estimate pipeline (fit, trim, match, ATT) per replicate. Replicates
// hitting separation or empty pools are dropped; more than 10% such failures
// raises ReplicateFailed.
BootstrapSe bootstrap_se(const Dataset& data, const MatchOptions& match_opts,
                         const MleOptions& mle_opts, std::size_t B,
                         std::uint64_t seed, int workers = 1);

struct DropKeepRow {
  std::size_t unit = 0;
  double ps = 0.0;
  bool kept = false;
  int z = 0;
};

// One row per unit; kept means the unit appears in the matched sample.
std::vector<DropKeepRow> drop_keep_export(const PropensityScores& scores,
                                          const MatchSet& ms,
                                          const Dataset& data);

}  // namespace un
