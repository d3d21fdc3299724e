#include "un/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "un/errors.hpp"
#include "un/stats.hpp"

namespace un {

namespace {

// Controls sorted by (score, original index); the index tiebreak keeps the
// layout deterministic when scores repeat, which they routinely do with
// discrete covariates.
struct SortedControls {
  std::vector<double> s;
  std::vector<std::size_t> idx;
};

SortedControls sort_controls(std::span<const std::size_t> control_idx,
                             std::span<const double> score) {
  SortedControls sc;
  sc.idx.assign(control_idx.begin(), control_idx.end());
  std::sort(sc.idx.begin(), sc.idx.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] < score[b];
    return a < b;
  });
  sc.s.resize(sc.idx.size());
  for (std::size_t i = 0; i < sc.idx.size(); ++i) sc.s[i] = score[sc.idx[i]];
  return sc;
}

// Prefix sums over availability flags; supports O(log n) selection of the
// r-th available control inside a position range.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : n_(n), tree_(n + 1) {
    for (std::size_t i = 1; i <= n; ++i) tree_[i] = i & (~i + 1);  // all ones
  }

  void remove(std::size_t pos) {  // pos is 0-based
    for (std::size_t i = pos + 1; i <= n_; i += i & (~i + 1)) tree_[i] -= 1;
  }

  std::size_t prefix(std::size_t count) const {  // sum of first `count` flags
    std::size_t s = 0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  // 0-based position of the available control with 0-based global rank r.
  std::size_t select(std::size_t r) const {
    std::size_t pos = 0;
    std::size_t want = r + 1;
    std::size_t mask = 1;
    while ((mask << 1) <= n_) mask <<= 1;
    for (; mask > 0; mask >>= 1) {
      const std::size_t nxt = pos + mask;
      if (nxt <= n_ && tree_[nxt] < want) {
        pos = nxt;
        want -= tree_[nxt];
      }
    }
    return pos;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> tree_;
};

std::vector<std::size_t> shuffled(std::span<const std::size_t> v, Rng& rng) {
  std::vector<std::size_t> out(v.begin(), v.end());
  rng.shuffle(out);
  return out;
}

}  // namespace

std::vector<std::size_t> trim_common_support(std::span<const double> score,
                                             std::span<const double> z) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_treated = false;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] == 1.0) {
      any_treated = true;
      lo = std::min(lo, score[i]);
      hi = std::max(hi, score[i]);
    }
  if (!any_treated) throw NoTreatedUnits("trim: no treated units");
  std::vector<std::size_t> retained;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] == 0.0 && score[i] >= lo && score[i] <= hi) retained.push_back(i);
  return retained;
}

MatchSet match_with_replacement(std::span<const std::size_t> treated_idx,
                                std::span<const std::size_t> control_idx,
                                std::span<const double> score, Rng& rng) {
  if (treated_idx.empty()) throw NoTreatedUnits("match: no treated units");
  if (control_idx.empty())
    throw EmptyControlPool("match: control pool is empty after trimming");

  const SortedControls sc = sort_controls(control_idx, score);
  const std::size_t m = sc.s.size();
  MatchSet ms;
  ms.pairs.reserve(treated_idx.size());
  std::vector<char> used(m, 0);

  for (const std::size_t t : shuffled(treated_idx, rng)) {
    const double st = score[t];
    const std::size_t pos =
        std::lower_bound(sc.s.begin(), sc.s.end(), st) - sc.s.begin();
    // Candidates are the full runs of equal scores nearest on each side.
    double dl = std::numeric_limits<double>::infinity();
    double dr = std::numeric_limits<double>::infinity();
    if (pos > 0) dl = st - sc.s[pos - 1];
    if (pos < m) dr = sc.s[pos] - st;
    const double d = std::min(dl, dr);
    std::size_t la = 0, lb = 0, ra = 0, rb = 0;  // [la,lb) left run, [ra,rb) right
    if (dl == d) {
      lb = pos;
      la = std::lower_bound(sc.s.begin(), sc.s.begin() + pos, sc.s[pos - 1]) -
           sc.s.begin();
    }
    if (dr == d) {
      ra = pos;
      rb = std::upper_bound(sc.s.begin() + pos, sc.s.end(), sc.s[pos]) -
           sc.s.begin();
    }
    const std::size_t count = (lb - la) + (rb - ra);
    std::size_t pick = static_cast<std::size_t>(rng.uniform_below(count));
    const std::size_t cpos = pick < (lb - la) ? la + pick : ra + (pick - (lb - la));
    const std::size_t c = sc.idx[cpos];
    ms.pairs.emplace_back(t, c);
    ms.matched_controls.push_back(c);
    used[cpos] = 1;
  }

  for (std::size_t i = 0; i < m; ++i)
    if (!used[i]) ms.dropped_controls.push_back(sc.idx[i]);
  return ms;
}

MatchSet match_no_replacement_caliper(std::span<const std::size_t> treated_idx,
                                      std::span<const std::size_t> control_idx,
                                      std::span<const double> score,
                                      double caliper_sd, Rng& rng) {
  if (!(caliper_sd > 0.0))
    throw Error("match: caliper_sd must be > 0, got " + std::to_string(caliper_sd));
  if (treated_idx.empty()) throw NoTreatedUnits("match: no treated units");

  std::vector<double> pooled;
  pooled.reserve(treated_idx.size() + control_idx.size());
  for (const std::size_t t : treated_idx) pooled.push_back(score[t]);
  for (const std::size_t c : control_idx) pooled.push_back(score[c]);
  const double width = caliper_sd * sample_sd(pooled);

  const SortedControls sc = sort_controls(control_idx, score);
  const std::size_t m = sc.s.size();
  Fenwick avail(m);
  MatchSet ms;
  ms.caliper_used = width;

  std::vector<char> used(m, 0);
  for (const std::size_t t : shuffled(treated_idx, rng)) {
    const double st = score[t];
    // Candidate window by bisection, then edges corrected with the exact
    // |st - s| <= width predicate so the recorded caliper always audits.
    std::size_t a = std::lower_bound(sc.s.begin(), sc.s.end(), st - width) -
                    sc.s.begin();
    std::size_t b = std::upper_bound(sc.s.begin(), sc.s.end(), st + width) -
                    sc.s.begin();
    while (a > 0 && std::fabs(st - sc.s[a - 1]) <= width) --a;
    while (b < m && std::fabs(sc.s[b] - st) <= width) ++b;
    while (a < b && std::fabs(st - sc.s[a]) > width) ++a;
    while (b > a && std::fabs(sc.s[b - 1] - st) > width) --b;

    const std::size_t n_avail = avail.prefix(b) - avail.prefix(a);
    if (n_avail == 0) {
      ms.dropped_treated.push_back(t);
      continue;
    }
    const std::size_t r = static_cast<std::size_t>(rng.uniform_below(n_avail));
    const std::size_t cpos = avail.select(avail.prefix(a) + r);
    avail.remove(cpos);
    used[cpos] = 1;
    ms.pairs.emplace_back(t, sc.idx[cpos]);
    ms.matched_controls.push_back(sc.idx[cpos]);
  }

  for (std::size_t i = 0; i < m; ++i)
    if (!used[i]) ms.dropped_controls.push_back(sc.idx[i]);
  return ms;
}

MatchFrequency match_frequency(const std::vector<MatchSet>& matchsets,
                               std::size_t n_units) {
  if (matchsets.empty()) throw Error("match_frequency: no matchsets");
  std::vector<std::size_t> count(n_units, 0);
  std::vector<char> present(n_units);
  for (const MatchSet& ms : matchsets) {
    std::fill(present.begin(), present.end(), 0);
    for (const auto& [t, c] : ms.pairs) {
      present[t] = 1;
      present[c] = 1;
    }
    for (const std::size_t c : ms.matched_controls) present[c] = 1;
    for (std::size_t i = 0; i < n_units; ++i) count[i] += present[i];
  }
  MatchFrequency f;
  f.fraction.resize(n_units);
  std::size_t at_least_once = 0;
  for (std::size_t i = 0; i < n_units; ++i) {
    f.fraction[i] =
        static_cast<double>(count[i]) / static_cast<double>(matchsets.size());
    if (count[i] > 0) ++at_least_once;
  }
  f.pct_matched_at_least_once =
      100.0 * static_cast<double>(at_least_once) / static_cast<double>(n_units);
  return f;
}

}  // namespace un
