#include "un/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "un/errors.hpp"
#include "un/parallel.hpp"
#include "un/pipeline.hpp"
#include "un/rng.hpp"
#include "un/stats.hpp"

namespace un {

AttPoint att_point(const MatchSet& ms, const Dataset& data,
                   ControlWeighting weighting) {
  if (ms.pairs.empty()) throw EmptyMatchSet("att: matchset has no pairs");
  AttPoint out;

  // p1 averages over the original treated group, not over the pairs: it is
  // matchset-independent, so every posterior draw shares the same p1.
  double ysum_t = 0.0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data.z[i] != 1.0) continue;
    ysum_t += data.y[i];
    ++n1;
  }
  out.n_treated = n1;
  out.p1 = ysum_t / static_cast<double>(n1);

  std::vector<std::size_t> uniq(ms.matched_controls);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  out.n_matched_controls = uniq.size();

  double ysum_c = 0.0;
  if (weighting == ControlWeighting::multiplicity) {
    for (const auto& [t, c] : ms.pairs) ysum_c += data.y[c];
    out.p0 = ysum_c / static_cast<double>(ms.pairs.size());
  } else {
    for (const std::size_t c : uniq) ysum_c += data.y[c];
    out.p0 = ysum_c / static_cast<double>(uniq.size());
  }

  out.att = out.p1 - out.p0;
  return out;
}

AttPosterior summarize_att_sample(std::vector<double> sample) {
  if (sample.size() < 2)
    throw Error("att posterior: need at least 2 draws, got " +
                std::to_string(sample.size()));
  AttPosterior out;
  out.mean = mean(sample);
  out.sd = sample_sd(sample);
  out.ci_lo = percentile(sample, 0.025);
  out.ci_hi = percentile(sample, 0.975);
  out.sample = std::move(sample);
  return out;
}

AttPosterior att_posterior(const std::vector<MatchSet>& matchsets,
                           const Dataset& data, ControlWeighting weighting) {
  if (matchsets.size() < 2)
    throw Error("att posterior: need at least 2 matchsets");
  std::vector<double> sample(matchsets.size());
  for (std::size_t k = 0; k < matchsets.size(); ++k) {
    try {
      sample[k] = att_point(matchsets[k], data, weighting).att;
    } catch (const EmptyMatchSet& e) {
      throw EmptyMatchSet("draw " + std::to_string(k) + ": " + e.what());
    }
  }
  return summarize_att_sample(std::move(sample));
}

BootstrapSe bootstrap_se(const Dataset& data, const MatchOptions& match_opts,
                         const MleOptions& mle_opts, std::size_t B,
                         std::uint64_t seed, int workers) {
  if (B < 2) throw Error("bootstrap: B must be >= 2");
  const std::size_t n = data.n();

  std::vector<double> att(B, 0.0);
  std::vector<char> ok(B, 0);
  parallel_for(B, workers, [&](std::size_t b) {
    Rng rng = Rng::derive(seed, "boot", b);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i)
      rows[i] = static_cast<std::size_t>(rng.uniform_below(n));
    const Dataset resampled = data.subset(rows);
    try {
      const PsmRun run = run_psm(resampled, match_opts, mle_opts,
                                 Rng::derive_seed(seed, "boot-match", b));
      att[b] = run.att.att;
      ok[b] = 1;
    } catch (const Error&) {
      // separation, empty pools, degenerate resamples: recorded, not fatal
    }
  });

  BootstrapSe out;
  out.B = B;
  for (std::size_t b = 0; b < B; ++b)
    if (ok[b]) out.replicates.push_back(att[b]);
  out.failed = B - out.replicates.size();
  if (out.failed * 10 > B || out.replicates.size() < 2)
    throw ReplicateFailed(out.failed, B,
                          "bootstrap: " + std::to_string(out.failed) + " of " +
                              std::to_string(B) + " replicates failed");
  out.se = sample_sd(out.replicates);
  return out;
}

std::vector<DropKeepRow> drop_keep_export(const PropensityScores& scores,
                                          const MatchSet& ms,
                                          const Dataset& data) {
  const std::size_t n = data.n();
  std::vector<char> kept(n, 0);
  for (const auto& [t, c] : ms.pairs) {
    kept[t] = 1;
    kept[c] = 1;
  }
  for (const std::size_t c : ms.matched_controls) kept[c] = 1;
  std::vector<DropKeepRow> rows(n);
  for (std::size_t i = 0; i < n; ++i)
    rows[i] = {i, scores.ps[i], kept[i] != 0, data.z[i] == 1.0 ? 1 : 0};
  return rows;
}

}  // namespace un
