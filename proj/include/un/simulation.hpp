#pragma once

// Synthetic data generation and the Monte Carlo study harness comparing the
// point-estimate and posterior matching pipelines.
//
// Data-generating process per replication: latent (u1, u2[, u3]) are
// multivariate normal with unit variances and pairwise correlation rho;
// x1 = 1[u1 > 0]; x2 is a 6-level ordinal built from equal-length intervals
// of the realized range of u2; x3 (misspecified mode only) is the 10-level
// analog of u3. Treatment is Bernoulli(inv_logit(gamma.[1 x1 x2 (x3)])),
// the outcome Bernoulli(inv_logit(theta0 + beta z + theta1 x1 + theta2 x2
// (+ theta3 x3))). The fitted propensity model always uses [1, x1, x2]; in
// misspecified mode x3 thus acts as an omitted confounder.

#include <cstdint>
#include <string>
#include <vector>

#include "un/estimator.hpp"
#include "un/matrix.hpp"
#include "un/propensity.hpp"
#include "un/rng.hpp"

namespace un {

struct SimConfig {
  std::size_t n = 500;
  std::size_t J = 10;
  std::vector<double> gamma_true = {-6.0, 2.0, 1.0};
  double gamma3 = 0.5;  // x3 assignment coefficient, misspecified mode
  double beta = 1.0;    // presets of interest: 1.0 and 0.25
  double theta0 = 0.0;
  double theta1 = 2.0;
  double theta2 = -2.0;
  double theta3 = 0.5;  // x3 outcome coefficient, misspecified mode
  double rho = 0.25;
  bool misspecified = false;
  bool att_over_all_units = false;  // average true effects over everyone
  std::uint64_t seed = 12345;
  int workers = 1;
  double max_fail_frac = 0.02;
  std::size_t B = 200;  // bootstrap replicates; used by the analyze pipeline

  MatchOptions match;
  McmcConfig mcmc;      // mcmc.K is the number of posterior matchings
  MleOptions mle;

  // All violated bounds, empty when valid.
  std::vector<std::string> problems() const;
  // Throws SchemaError listing every violated bound.
  void validate() const;
};

// All report numbers are on the x100 scale (percentage points), matching
// the usual presentation of probability-difference effects.
struct MethodReport {
  std::string method;  // "psm" | "bpsm"
  double pct_matched_at_least_once = 0.0;
  double att_mean = 0.0;
  double ci_lo = 0.0;   // 2.5 percentile of estimates across replications
  double ci_hi = 0.0;   // 97.5 percentile
  double bias = 0.0;    // mean(estimate - truth)
  double mab = 0.0;     // mean |estimate - truth|
  double rmse = 0.0;    // sqrt(mean (estimate - truth)^2)
};

struct PerReplication {
  std::size_t j = 0;
  std::string method;
  double att_estimate = 0.0;  // probability scale
  double true_att = 0.0;      // probability scale
};

struct SimStudyReport {
  std::vector<MethodReport> rows;  // psm then bpsm
  std::vector<PerReplication> per_replication;
  std::size_t n = 0;
  std::size_t J = 0;
  std::size_t failed_replications = 0;
  std::vector<std::string> failures;  // "j: cause"
};

// Covariate columns: x1, x2 and, in misspecified mode, x3.
Matrix gen_covariates(std::size_t n, double rho, bool misspecified, Rng& rng);

// gamma spans intercept first, then one coefficient per covariate column.
std::vector<double> gen_treatment(const Matrix& covs,
                                  std::span<const double> gamma, Rng& rng);

// theta = {theta0, theta1, theta2[, theta3]}; beta multiplies z.
std::vector<double> gen_outcome(const Matrix& covs, std::span<const double> z,
                                double beta, std::span<const double> theta,
                                Rng& rng);

// Mean over treated units (or all units) of the unit-level effect
// inv_logit(theta0 + beta + theta.x) - inv_logit(theta0 + theta.x).
double true_att(const Matrix& covs, std::span<const double> z, double beta,
                std::span<const double> theta, bool over_all_units = false);

SimStudyReport run_study(const SimConfig& cfg);

}  // namespace un
