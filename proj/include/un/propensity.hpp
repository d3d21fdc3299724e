#pragma once

// Logistic propensity model: maximum-likelihood fit (Newton-Raphson with
// step halving), posterior sampling (random-walk Metropolis-Hastings), and
// score prediction.

#include <cstdint>
#include <span>
#include <vector>

#include "un/dataset.hpp"
#include "un/matrix.hpp"
#include "un/stats.hpp"

namespace un {

struct MleOptions {
  double tol = 1e-8;          // max-norm of the gradient at convergence
  int max_iter = 100;
  double separation_threshold = 30.0;  // sup-norm of gamma that flags separation
};

struct PropensityFit {
  std::vector<double> gamma;
  Matrix cov;        // inverse observed information at gamma
  bool converged = false;
  int iterations = 0;
};

struct McmcConfig {
  int burn_in = 2000;
  int K = 1000;      // saved draws
  int thin = 5;
  double prior_var = 100.0;  // independent Normal(0, prior_var) per coefficient
  std::uint64_t seed = 0;
};

struct PosteriorDraws {
  Matrix draws;      // K x p
  int burn_in = 0;
  int thin = 1;
  double acceptance_rate = 0.0;

  std::size_t K() const { return draws.rows(); }
  std::size_t p() const { return draws.cols(); }
  std::vector<double> row(std::size_t k) const;
};

struct PropensityScores {
  std::vector<double> ps;
  std::vector<double> eta;
};

PropensityFit fit_mle(const Dataset& data, const MleOptions& opts = {});

// Proposal covariance is (2.38^2 / p) times the MLE covariance; the chain
// starts at the MLE. Throws ChainDiverged on a non-finite log-posterior and
// propagates MLE errors from initialization.
PosteriorDraws fit_bayes(const Dataset& data, const McmcConfig& cfg,
                         const MleOptions& mle_opts = {});

PropensityScores predict(std::span<const double> gamma, const Matrix& X);

// Per-unit mean/sd/2.5%/97.5% of the propensity score over the K draws.
std::vector<Summary> posterior_ps_summary(const PosteriorDraws& draws,
                                          const Matrix& X);

}  // namespace un
