#include "un/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "un/errors.hpp"
#include "un/kernels.hpp"
#include "un/rng.hpp"

namespace un {

namespace {

// eta = X gamma, one contiguous axpy per design column.
void linear_predictor(const Matrix& X, std::span<const double> gamma,
                      std::vector<double>& eta) {
  eta.assign(X.rows(), 0.0);
  for (std::size_t j = 0; j < X.cols(); ++j) kernels::axpy(gamma[j], X.col(j), eta);
}

double log_likelihood(const Matrix& X, std::span<const double> z,
                      std::span<const double> gamma, std::vector<double>& eta_buf) {
  linear_predictor(X, gamma, eta_buf);
  return kernels::bernoulli_loglik(eta_buf, z);
}

}  // namespace

PropensityFit fit_mle(const Dataset& data, const MleOptions& opts) {
  data.validate();
  const Matrix& X = data.X;
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();

  PropensityFit fit;
  fit.gamma.assign(p, 0.0);
  std::vector<double> eta(n), ps(n), w(n), resid(n), grad(p), cand(p);
  Matrix info(p, p);

  for (;;) {
    linear_predictor(X, fit.gamma, eta);
    kernels::inv_logit(eta, ps);
    for (std::size_t i = 0; i < n; ++i) resid[i] = data.z[i] - ps[i];
    double gmax = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      grad[j] = kernels::dot(X.col(j), resid);
      gmax = std::max(gmax, std::fabs(grad[j]));
    }
    for (std::size_t i = 0; i < n; ++i) w[i] = ps[i] * (1.0 - ps[i]);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k <= j; ++k) {
        const double h = kernels::weighted_dot(w, X.col(j), X.col(k));
        info(j, k) = h;
        info(k, j) = h;
      }

    if (gmax < opts.tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= opts.max_iter)
      throw NotConverged("logistic fit: no convergence in " +
                         std::to_string(opts.max_iter) + " iterations");

    const Matrix L = cholesky(info);  // SingularInformation on failure
    const std::vector<double> delta = cholesky_solve(L, grad);

    // Newton step with step halving on the log-likelihood. Near the optimum
    // the true gain per step falls below the rounding granularity of the
    // likelihood sum, so acceptance needs a noise-level slack or the search
    // stalls with the gradient just above tolerance.
    const double ll_old = kernels::bernoulli_loglik(eta, data.z);
    const double slack = 1e-10 * (1.0 + std::fabs(ll_old));
    double s = 1.0;
    for (int h = 0;; ++h) {
      for (std::size_t j = 0; j < p; ++j) cand[j] = fit.gamma[j] + s * delta[j];
      const double ll_new = log_likelihood(X, data.z, cand, eta);
      if (ll_new >= ll_old - slack) break;
      if (h >= 60)
        throw NotConverged("logistic fit: step halving failed to improve");
      s *= 0.5;
    }
    fit.gamma = cand;
    ++fit.iterations;

    double sup = 0.0;
    for (double g : fit.gamma) sup = std::max(sup, std::fabs(g));
    if (sup > opts.separation_threshold)
      throw SeparationDetected(
          "logistic fit: coefficients diverging (sup-norm " + std::to_string(sup) +
          "), treatment groups look separable");
  }

  fit.cov = cholesky_inverse(cholesky(info));
  return fit;
}

PosteriorDraws fit_bayes(const Dataset& data, const McmcConfig& cfg,
                         const MleOptions& mle_opts) {
  if (cfg.K < 1) throw SchemaError("mcmc: K must be >= 1");
  if (cfg.thin < 1) throw SchemaError("mcmc: thin must be >= 1");
  if (cfg.burn_in < 0) throw SchemaError("mcmc: burn_in must be >= 0");
  if (!(cfg.prior_var > 0.0)) throw SchemaError("mcmc: prior_var must be > 0");

  const PropensityFit fit = fit_mle(data, mle_opts);
  const Matrix& X = data.X;
  const std::size_t p = X.cols();

  Matrix prop_cov(p, p);
  const double scale = 2.38 * 2.38 / static_cast<double>(p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < p; ++k) prop_cov(j, k) = scale * fit.cov(j, k);
  const Matrix L = cholesky(prop_cov);

  std::vector<double> eta_buf(X.rows());
  const auto log_post = [&](std::span<const double> g) {
    double pen = 0.0;
    for (double v : g) pen += v * v;
    return log_likelihood(X, data.z, g, eta_buf) - 0.5 * pen / cfg.prior_var;
  };

  Rng rng(cfg.seed);
  std::vector<double> gamma = fit.gamma;
  double cur = log_post(gamma);
  if (!std::isfinite(cur))
    throw ChainDiverged("mcmc: non-finite log-posterior at initialization");

  PosteriorDraws out;
  out.burn_in = cfg.burn_in;
  out.thin = cfg.thin;
  out.draws = Matrix(static_cast<std::size_t>(cfg.K), p);

  const long total = static_cast<long>(cfg.burn_in) +
                     static_cast<long>(cfg.K) * static_cast<long>(cfg.thin);
  long accepted = 0;
  std::vector<double> step(p), prop(p);
  for (long it = 0; it < total; ++it) {
    for (std::size_t j = 0; j < p; ++j) step[j] = rng.normal();
    for (std::size_t i = 0; i < p; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += L(i, k) * step[k];
      prop[i] = gamma[i] + s;
    }
    const double lp = log_post(prop);
    if (std::isnan(lp)) throw ChainDiverged("mcmc: NaN log-posterior at iteration " +
                                            std::to_string(it));
    // -inf proposals reject naturally through the comparison below.
    if (std::log(rng.uniform()) < lp - cur) {
      gamma = prop;
      cur = lp;
      ++accepted;
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) {
      const std::size_t row = static_cast<std::size_t>((it - cfg.burn_in) / cfg.thin);
      for (std::size_t j = 0; j < p; ++j) out.draws(row, j) = gamma[j];
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return out;
}

std::vector<double> PosteriorDraws::row(std::size_t k) const {
  std::vector<double> g(p());
  for (std::size_t j = 0; j < p(); ++j) g[j] = draws(k, j);
  return g;
}

PropensityScores predict(std::span<const double> gamma, const Matrix& X) {
  if (gamma.size() != X.cols())
    throw DimensionMismatch("predict: gamma has " + std::to_string(gamma.size()) +
                            " coefficients for " + std::to_string(X.cols()) +
                            " design columns");
  for (double g : gamma)
    if (!std::isfinite(g)) throw Error("predict: non-finite coefficient");
  PropensityScores out;
  linear_predictor(X, gamma, out.eta);
  out.ps.resize(out.eta.size());
  kernels::inv_logit(out.eta, out.ps);
  return out;
}

std::vector<Summary> posterior_ps_summary(const PosteriorDraws& draws,
                                          const Matrix& X) {
  const std::size_t K = draws.K();
  if (K < 2) throw Error("posterior_ps_summary: need at least 2 draws");
  const std::size_t n = X.rows();
  Matrix per_unit(K, n);  // column i = unit i's scores across draws
  for (std::size_t k = 0; k < K; ++k) {
    const PropensityScores s = predict(draws.row(k), X);
    for (std::size_t i = 0; i < n; ++i) per_unit(k, i) = s.ps[i];
  }
  std::vector<Summary> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = summarize(per_unit.col(i));
  return out;
}

}  // namespace un
