#include "un/pipeline.hpp"

#include <algorithm>
#include <vector>

#include "un/errors.hpp"
#include "un/parallel.hpp"
#include "un/rng.hpp"

namespace un {

namespace {

// One trim + match pass on an already-fitted score vector.
MatchSet trim_and_match(const Dataset& data, std::span<const double> score,
                        const std::vector<std::size_t>& treated,
                        const MatchOptions& opts, Rng& rng) {
  const std::vector<std::size_t> retained = trim_common_support(score, data.z);
  MatchSet ms =
      opts.with_replacement
          ? match_with_replacement(treated, retained, score, rng)
          : match_no_replacement_caliper(treated, retained, score,
                                         opts.caliper_sd, rng);
  // Controls trimmed away join the dropped set so drop/keep exports see them.
  std::vector<char> is_retained(data.n(), 0);
  for (const std::size_t c : retained) is_retained[c] = 1;
  for (std::size_t i = 0; i < data.n(); ++i)
    if (data.z[i] == 0.0 && !is_retained[i]) ms.dropped_controls.push_back(i);
  return ms;
}

}  // namespace

PsmRun run_psm(const Dataset& data, const MatchOptions& match_opts,
               const MleOptions& mle_opts, std::uint64_t match_seed) {
  PsmRun r;
  r.fit = fit_mle(data, mle_opts);
  r.scores = predict(r.fit.gamma, data.X);
  const std::vector<double>& score =
      match_opts.match_on_linear_predictor ? r.scores.eta : r.scores.ps;
  Rng rng(match_seed);
  r.matchset =
      trim_and_match(data, score, data.treated_indices(), match_opts, rng);
  r.att = att_point(r.matchset, data, match_opts.weighting);
  return r;
}

BpsmRun run_bpsm(const Dataset& data, const MatchOptions& match_opts,
                 const McmcConfig& mcmc, const MleOptions& mle_opts,
                 std::uint64_t seed, int workers) {
  BpsmRun r;
  McmcConfig cfg = mcmc;
  cfg.seed = Rng::derive_seed(seed, "mcmc");
  r.draws = fit_bayes(data, cfg, mle_opts);

  const std::size_t K = r.draws.K();
  const std::vector<std::size_t> treated = data.treated_indices();
  r.matchsets.resize(K);
  parallel_for(K, workers, [&](std::size_t k) {
    const PropensityScores s = predict(r.draws.row(k), data.X);
    const std::vector<double>& score =
        match_opts.match_on_linear_predictor ? s.eta : s.ps;
    Rng rng = Rng::derive(seed, "bpsm-match", k);
    r.matchsets[k] = trim_and_match(data, score, treated, match_opts, rng);
  });

  r.att = att_posterior(r.matchsets, data, match_opts.weighting);
  return r;
}

}  // namespace un
