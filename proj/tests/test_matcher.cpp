#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "un/errors.hpp"
#include "un/matcher.hpp"
#include "un/stats.hpp"

namespace {

struct Instance {
  std::vector<double> score;
  std::vector<double> z;
  std::vector<std::size_t> treated;
  std::vector<std::size_t> controls;
};

// Random instance; on a coarse grid when `discrete`, so exact ties are
// common, as they are with few covariate patterns.
Instance random_instance(un::Rng& rng, std::size_t n, bool discrete) {
  Instance ins;
  ins.score.resize(n);
  ins.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rng.uniform();
    if (discrete) s = std::floor(s * 20.0) / 20.0 + 0.025;
    ins.score[i] = s;
    ins.z[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
  }
  // Force at least one unit on each side.
  ins.z[0] = 1.0;
  if (n > 1) ins.z[1] = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    (ins.z[i] == 1.0 ? ins.treated : ins.controls).push_back(i);
  return ins;
}

}  // namespace

TEST_CASE("trim keeps exactly the controls inside the treated score range") {
  {
    const std::vector<double> score = {0.3, 0.6, 0.1, 0.4, 0.7};
    const std::vector<double> z = {1, 1, 0, 0, 0};
    CHECK(un::trim_common_support(score, z) == std::vector<std::size_t>{3});
  }
  {
    const std::vector<double> score = {0.2, 0.8, 0.3, 0.5, 0.8, 0.2};
    const std::vector<double> z = {1, 1, 0, 0, 0, 0};
    // Bounds are closed, so controls exactly at min/max stay.
    CHECK(un::trim_common_support(score, z) ==
          std::vector<std::size_t>{2, 3, 4, 5});
  }
  {
    const std::vector<double> score = {0.1, 0.2};
    const std::vector<double> z = {0, 0};
    CHECK_THROWS_AS(un::trim_common_support(score, z), un::NoTreatedUnits);
  }

  un::Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const Instance ins = random_instance(rng, 200, t % 2 == 0);
    double lo = 1e300, hi = -1e300;
    for (const std::size_t i : ins.treated) {
      lo = std::min(lo, ins.score[i]);
      hi = std::max(hi, ins.score[i]);
    }
    std::vector<std::size_t> expect;
    for (const std::size_t c : ins.controls)
      if (ins.score[c] >= lo && ins.score[c] <= hi) expect.push_back(c);
    CHECK(un::trim_common_support(ins.score, ins.z) == expect);
  }
}

TEST_CASE("with replacement: unique nearest control is always chosen") {
  const std::vector<double> score = {0.5, 0.4, 0.9};
  const std::vector<std::size_t> treated = {0}, controls = {1, 2};
  un::Rng rng(1);
  const un::MatchSet ms = un::match_with_replacement(treated, controls, score, rng);
  REQUIRE(ms.pairs.size() == 1);
  CHECK(ms.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(ms.matched_controls == std::vector<std::size_t>{1});
  CHECK(ms.dropped_treated.empty());
  CHECK(ms.dropped_controls == std::vector<std::size_t>{2});
}

TEST_CASE("with replacement: equidistant controls split 50/50") {
  const std::vector<double> score = {0.5, 0.4, 0.6};
  const std::vector<std::size_t> treated = {0}, controls = {1, 2};
  int left = 0;
  const int runs = 10000;
  for (int r = 0; r < runs; ++r) {
    un::Rng rng(1000 + r);
    const un::MatchSet ms =
        un::match_with_replacement(treated, controls, score, rng);
    left += ms.pairs[0].second == 1;
  }
  CHECK(left / static_cast<double>(runs) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(left - runs / 2) < runs / 20);  // 0.5 +- 0.05 absolute
}

TEST_CASE("with replacement: equal-score runs are uniform tie candidates") {
  // Controls 1,2,3 share the treated unit's exact score; control 4 is close
  // but strictly farther, so only the run {1,2,3} may ever be selected.
  const std::vector<double> score = {0.40, 0.40, 0.40, 0.40, 0.41};
  const std::vector<std::size_t> treated = {0}, controls = {1, 2, 3, 4};
  std::map<std::size_t, int> freq;
  const int runs = 9000;
  for (int r = 0; r < runs; ++r) {
    un::Rng rng(50000 + r);
    const un::MatchSet ms =
        un::match_with_replacement(treated, controls, score, rng);
    ++freq[ms.pairs[0].second];
  }
  CHECK(freq.count(4) == 0);
  REQUIRE(freq.size() == 3);
  for (const auto& [c, count] : freq)
    CHECK(count == doctest::Approx(runs / 3.0).epsilon(0.1));
}

TEST_CASE("with replacement matches the exhaustive nearest scan") {
  un::Rng rng(22);
  for (int t = 0; t < 200; ++t) {
    const Instance ins = random_instance(rng, 8 + rng.uniform_below(60), t % 2 == 0);
    un::Rng mrng(900 + t);
    const un::MatchSet ms =
        un::match_with_replacement(ins.treated, ins.controls, ins.score, mrng);

    CHECK(ms.pairs.size() == ins.treated.size());
    CHECK(ms.dropped_treated.empty());
    std::set<std::size_t> seen_treated;
    for (const auto& [tr, c] : ms.pairs) {
      seen_treated.insert(tr);
      const oracle::NearestSet ns =
          oracle::nearest_controls(tr, ins.controls, ins.score);
      CHECK(std::fabs(ins.score[tr] - ins.score[c]) == ns.dist);
      CHECK(std::count(ns.controls.begin(), ns.controls.end(), c) == 1);
    }
    CHECK(seen_treated.size() == ins.treated.size());

    // dropped_controls = controls never used.
    std::set<std::size_t> used(ms.matched_controls.begin(),
                               ms.matched_controls.end());
    CHECK(used.size() + ms.dropped_controls.size() == ins.controls.size());
    for (const std::size_t c : ms.dropped_controls) CHECK(used.count(c) == 0);
  }
}

TEST_CASE("with replacement: pairing distances do not depend on the seed") {
  un::Rng rng(23);
  const Instance ins = random_instance(rng, 120, true);
  std::vector<double> ref;
  for (int seed = 0; seed < 5; ++seed) {
    un::Rng mrng(seed);
    const un::MatchSet ms =
        un::match_with_replacement(ins.treated, ins.controls, ins.score, mrng);
    std::vector<double> d;
    for (const auto& [t, c] : ms.pairs)
      d.push_back(std::fabs(ins.score[t] - ins.score[c]));
    std::sort(d.begin(), d.end());
    if (seed == 0)
      ref = d;
    else
      CHECK(d == ref);
  }
}

TEST_CASE("with replacement: error cases") {
  const std::vector<double> score = {0.5, 0.4};
  un::Rng rng(1);
  const std::vector<std::size_t> treated = {0}, controls = {1}, none = {};
  CHECK_THROWS_AS(un::match_with_replacement(none, controls, score, rng),
                  un::NoTreatedUnits);
  CHECK_THROWS_AS(un::match_with_replacement(treated, none, score, rng),
                  un::EmptyControlPool);
}

TEST_CASE("caliper: out-of-width treated units are dropped, not fatal") {
  // sd of {0.5, 0.9} is ~0.2828; caliper 0.25 sd ~ 0.0707 < 0.4 apart.
  const std::vector<double> score = {0.5, 0.9};
  const std::vector<std::size_t> treated = {0}, controls = {1};
  un::Rng rng(3);
  const un::MatchSet ms =
      un::match_no_replacement_caliper(treated, controls, score, 0.25, rng);
  CHECK(ms.pairs.empty());
  CHECK(ms.dropped_treated == std::vector<std::size_t>{0});
  CHECK(ms.dropped_controls == std::vector<std::size_t>{1});
  REQUIRE(ms.caliper_used.has_value());
  const std::vector<double> pooled = {0.5, 0.9};
  CHECK(*ms.caliper_used == doctest::Approx(0.25 * un::sample_sd(pooled)));
}

TEST_CASE("caliper: no replacement exhausts the pool") {
  const std::vector<double> score = {0.50, 0.51, 0.50};
  const std::vector<std::size_t> treated = {0, 1}, controls = {2};
  for (int seed = 0; seed < 20; ++seed) {
    un::Rng rng(seed);
    const un::MatchSet ms =
        un::match_no_replacement_caliper(treated, controls, score, 100.0, rng);
    CHECK(ms.pairs.size() == 1);
    CHECK(ms.dropped_treated.size() == 1);
    CHECK(ms.matched_controls == std::vector<std::size_t>{2});
  }
}

TEST_CASE("caliper: candidates are selected uniformly") {
  const std::vector<double> score = {0.5, 0.45, 0.5, 0.55};
  const std::vector<std::size_t> treated = {0}, controls = {1, 2, 3};
  std::map<std::size_t, int> freq;
  const int runs = 9000;
  for (int r = 0; r < runs; ++r) {
    un::Rng rng(7000 + r);
    const un::MatchSet ms =
        un::match_no_replacement_caliper(treated, controls, score, 3.0, rng);
    REQUIRE(ms.pairs.size() == 1);
    ++freq[ms.pairs[0].second];
  }
  REQUIRE(freq.size() == 3);
  for (const auto& [c, count] : freq)
    CHECK(count == doctest::Approx(runs / 3.0).epsilon(0.1));
}

TEST_CASE("caliper audit: every pair is within the recorded width") {
  un::Rng rng(24);
  for (int t = 0; t < 200; ++t) {
    const Instance ins =
        random_instance(rng, 10 + rng.uniform_below(120), t % 2 == 0);
    const double caliper_sd = 0.05 + 0.5 * rng.uniform();
    un::Rng mrng(31000 + t);
    const un::MatchSet ms = un::match_no_replacement_caliper(
        ins.treated, ins.controls, ins.score, caliper_sd, mrng);

    REQUIRE(ms.caliper_used.has_value());

    // Recorded width recomputed independently from the pooled scores.
    std::vector<double> pooled;
    for (const std::size_t i : ins.treated) pooled.push_back(ins.score[i]);
    for (const std::size_t c : ins.controls) pooled.push_back(ins.score[c]);
    CHECK(*ms.caliper_used ==
          doctest::Approx(caliper_sd * oracle::sd(pooled)).epsilon(1e-12));

    std::set<std::size_t> used;
    for (const auto& [tr, c] : ms.pairs) {
      CHECK(std::fabs(ins.score[tr] - ins.score[c]) <= *ms.caliper_used);
      CHECK(used.insert(c).second);  // no control reused
    }
    CHECK(ms.pairs.size() + ms.dropped_treated.size() == ins.treated.size());
    CHECK(ms.pairs.size() <= std::min(ins.treated.size(), ins.controls.size()));

    // A dropped treated unit must truly have had no unmatched candidate at
    // the moment it was processed; weaker but order-free: if it was dropped
    // while some control within width was never matched at all, that is a
    // contradiction.
    for (const std::size_t d : ms.dropped_treated)
      for (const std::size_t c : ins.controls)
        if (used.count(c) == 0)
          CHECK(std::fabs(ins.score[d] - ins.score[c]) > *ms.caliper_used);
  }
}

TEST_CASE("match_frequency arithmetic") {
  un::MatchSet a, b, c;
  a.pairs = {{0, 3}};
  a.matched_controls = {3};
  b.pairs = {{0, 4}};
  b.matched_controls = {4};
  c.pairs = {{1, 3}};
  c.matched_controls = {3};
  const un::MatchFrequency f = un::match_frequency({a, b, c}, 6);
  CHECK(f.fraction[0] == doctest::Approx(2.0 / 3.0));  // in a and b
  CHECK(f.fraction[1] == doctest::Approx(1.0 / 3.0));
  CHECK(f.fraction[2] == 0.0);
  CHECK(f.fraction[3] == doctest::Approx(2.0 / 3.0));
  CHECK(f.fraction[4] == doctest::Approx(1.0 / 3.0));
  CHECK(f.fraction[5] == 0.0);
  // 4 of 6 units appear at least once.
  CHECK(f.pct_matched_at_least_once == doctest::Approx(100.0 * 4.0 / 6.0));

  CHECK_THROWS_AS(un::match_frequency({}, 3), un::Error);
}
