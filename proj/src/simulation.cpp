#include "un/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "un/errors.hpp"
#include "un/kernels.hpp"
#include "un/parallel.hpp"
#include "un/pipeline.hpp"
#include "un/stats.hpp"

namespace un {

namespace {

double inv_logit_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Equal-length interval code over the realized range: value in {1, ..., k}.
std::vector<double> bin_equal_length(const std::vector<double>& u, int k) {
  const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
  const double lo = *lo_it;
  const double w = (*hi_it - lo) / static_cast<double>(k);
  std::vector<double> out(u.size(), 1.0);
  if (w <= 0.0) return out;  // degenerate constant sample
  for (std::size_t i = 0; i < u.size(); ++i) {
    int b = 1 + static_cast<int>((u[i] - lo) / w);
    out[i] = static_cast<double>(std::clamp(b, 1, k));  // max lands in bin k+1
  }
  return out;
}

}  // namespace

Matrix gen_covariates(std::size_t n, double rho, bool misspecified, Rng& rng) {
  if (n < 2) throw Error("gen_covariates: n must be >= 2");
  const std::size_t d = misspecified ? 3 : 2;

  Matrix corr(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) corr(i, j) = i == j ? 1.0 : rho;
  const Matrix L = cholesky(corr);  // latent scale

  std::vector<std::vector<double>> u(d, std::vector<double>(n));
  std::vector<double> zvec(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) zvec[j] = rng.normal();
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += L(j, k) * zvec[k];
      u[j][i] = s;
    }
  }

  Matrix covs(n, d);
  for (std::size_t i = 0; i < n; ++i) covs(i, 0) = u[0][i] > 0.0 ? 1.0 : 0.0;
  const std::vector<double> x2 = bin_equal_length(u[1], 6);
  for (std::size_t i = 0; i < n; ++i) covs(i, 1) = x2[i];
  if (misspecified) {
    const std::vector<double> x3 = bin_equal_length(u[2], 10);
    for (std::size_t i = 0; i < n; ++i) covs(i, 2) = x3[i];
  }
  return covs;
}

std::vector<double> gen_treatment(const Matrix& covs,
                                  std::span<const double> gamma, Rng& rng) {
  if (gamma.size() != covs.cols() + 1)
    throw DimensionMismatch("gen_treatment: gamma must have an intercept plus one "
                            "coefficient per covariate");
  const std::size_t n = covs.rows();
  std::vector<double> eta(n, gamma[0]), ps(n), z(n);
  for (std::size_t j = 0; j < covs.cols(); ++j)
    kernels::axpy(gamma[j + 1], covs.col(j), eta);
  kernels::inv_logit(eta, ps);
  for (std::size_t i = 0; i < n; ++i) z[i] = rng.bernoulli(ps[i]) ? 1.0 : 0.0;
  return z;
}

std::vector<double> gen_outcome(const Matrix& covs, std::span<const double> z,
                                double beta, std::span<const double> theta,
                                Rng& rng) {
  if (theta.size() != covs.cols() + 1)
    throw DimensionMismatch("gen_outcome: theta must have an intercept plus one "
                            "coefficient per covariate");
  if (z.size() != covs.rows())
    throw DimensionMismatch("gen_outcome: z length mismatch");
  const std::size_t n = covs.rows();
  std::vector<double> eta(n, theta[0]), py(n), y(n);
  for (std::size_t j = 0; j < covs.cols(); ++j)
    kernels::axpy(theta[j + 1], covs.col(j), eta);
  kernels::axpy(beta, z, eta);
  kernels::inv_logit(eta, py);
  for (std::size_t i = 0; i < n; ++i) y[i] = rng.bernoulli(py[i]) ? 1.0 : 0.0;
  return y;
}

double true_att(const Matrix& covs, std::span<const double> z, double beta,
                std::span<const double> theta, bool over_all_units) {
  if (theta.size() != covs.cols() + 1)
    throw DimensionMismatch("true_att: theta must have an intercept plus one "
                            "coefficient per covariate");
  if (z.size() != covs.rows()) throw DimensionMismatch("true_att: z length mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < covs.rows(); ++i) {
    if (!over_all_units && z[i] != 1.0) continue;
    double base = theta[0];
    for (std::size_t j = 0; j < covs.cols(); ++j) base += theta[j + 1] * covs(i, j);
    sum += inv_logit_scalar(base + beta) - inv_logit_scalar(base);
    ++count;
  }
  if (count == 0) throw NoTreatedUnits("true_att: no treated units");
  return sum / static_cast<double>(count);
}

std::vector<std::string> SimConfig::problems() const {
  std::vector<std::string> out;
  const auto bad = [&](const std::string& msg) { out.push_back(msg); };
  if (n < 50) bad("n must be >= 50, got " + std::to_string(n));
  if (J < 1) bad("J must be >= 1");
  if (!(rho > -1.0 && rho < 1.0)) bad("rho must lie in (-1, 1)");
  if (misspecified && !(rho > -0.5))
    bad("rho must exceed -0.5 with a third covariate (correlation matrix must "
        "stay positive definite)");
  if (gamma_true.size() != 3)
    bad("gamma_true must have exactly 3 entries (intercept, x1, x2)");
  for (double g : gamma_true)
    if (!std::isfinite(g)) bad("gamma_true entries must be finite");
  for (double v : {gamma3, beta, theta0, theta1, theta2, theta3})
    if (!std::isfinite(v)) bad("coefficients must be finite");
  if (!(max_fail_frac >= 0.0 && max_fail_frac <= 1.0))
    bad("max_fail_frac must lie in [0, 1]");
  if (workers < 1) bad("workers must be >= 1");
  if (B < 2) bad("B must be >= 2");
  if (!(match.caliper_sd > 0.0)) bad("caliper_sd must be > 0");
  if (mcmc.K < 2) bad("K must be >= 2");
  if (mcmc.thin < 1) bad("thin must be >= 1");
  if (mcmc.burn_in < 0) bad("burn_in must be >= 0");
  if (!(mcmc.prior_var > 0.0)) bad("prior_var must be > 0");
  if (!(mle.tol > 0.0)) bad("mle_tol must be > 0");
  if (mle.max_iter < 1) bad("mle_max_iter must be >= 1");
  if (!(mle.separation_threshold > 0.0)) bad("separation_threshold must be > 0");
  return out;
}

void SimConfig::validate() const {
  const std::vector<std::string> p = problems();
  if (p.empty()) return;
  std::string msg = "config:";
  for (const std::string& s : p) msg += "\n  - " + s;
  throw SchemaError(msg);
}

namespace {

struct RepSlot {
  bool ok = false;
  std::string cause;
  double psm_att = 0.0;
  double bpsm_att = 0.0;
  double truth = 0.0;
  double psm_pct = 0.0;
  double bpsm_pct = 0.0;
};

// Cheap independent recheck of the closed-form effect average; catches any
// disagreement between the generator's covariates and the effect computation.
double true_att_recheck(const Matrix& covs, std::span<const double> z, double beta,
                        std::span<const double> theta, bool over_all) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t ii = covs.rows(); ii-- > 0;) {
    if (!over_all && z[ii] != 1.0) continue;
    double eta1 = theta[0] + beta;
    double eta0 = theta[0];
    for (std::size_t j = 0; j < covs.cols(); ++j) {
      eta1 += theta[j + 1] * covs(ii, j);
      eta0 += theta[j + 1] * covs(ii, j);
    }
    sum += 1.0 / (1.0 + std::exp(-eta1)) - 1.0 / (1.0 + std::exp(-eta0));
    ++count;
  }
  return sum / static_cast<double>(count);
}

MethodReport make_row(const std::string& method, std::span<const double> est,
                      std::span<const double> truth, std::span<const double> pct) {
  MethodReport row;
  row.method = method;
  row.pct_matched_at_least_once = mean(pct);
  std::vector<double> est100(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) est100[i] = est[i] * 100.0;
  row.att_mean = mean(est100);
  row.ci_lo = percentile(est100, 0.025);
  row.ci_hi = percentile(est100, 0.975);
  std::vector<double> diff(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) diff[i] = est[i] - truth[i];
  double sum = 0.0, asum = 0.0, ssum = 0.0;
  for (const double d : diff) {
    sum += d;
    asum += std::fabs(d);
    ssum += d * d;
  }
  const double inv = 1.0 / static_cast<double>(diff.size());
  row.bias = sum * inv * 100.0;
  row.mab = asum * inv * 100.0;
  row.rmse = std::sqrt(ssum * inv) * 100.0;
  if (!(row.rmse >= row.mab && row.mab >= std::fabs(row.bias)))
    throw Error("internal: error-metric ordering violated for " + method);
  return row;
}

}  // namespace

SimStudyReport run_study(const SimConfig& cfg) {
  cfg.validate();

  std::vector<double> dgp_gamma = cfg.gamma_true;
  std::vector<double> dgp_theta = {cfg.theta0, cfg.theta1, cfg.theta2};
  if (cfg.misspecified) {
    dgp_gamma.push_back(cfg.gamma3);
    dgp_theta.push_back(cfg.theta3);
  }

  std::vector<RepSlot> slots(cfg.J);
  parallel_for(cfg.J, cfg.workers, [&](std::size_t j) {
    RepSlot& slot = slots[j];
    try {
      const std::uint64_t rep_seed = Rng::derive_seed(cfg.seed, "rep", j);
      Rng data_rng = Rng::derive(rep_seed, "data");
      const Matrix covs =
          gen_covariates(cfg.n, cfg.rho, cfg.misspecified, data_rng);
      const std::vector<double> z = gen_treatment(covs, dgp_gamma, data_rng);
      const std::vector<double> y =
          gen_outcome(covs, z, cfg.beta, dgp_theta, data_rng);
      slot.truth = true_att(covs, z, cfg.beta, dgp_theta, cfg.att_over_all_units);
      const double recheck =
          true_att_recheck(covs, z, cfg.beta, dgp_theta, cfg.att_over_all_units);
      if (!(std::fabs(slot.truth - recheck) <=
            1e-12 * std::max(1.0, std::fabs(slot.truth))))
        throw Error("internal: effect recheck mismatch");

      // Fitted propensity model always uses [1, x1, x2]; in misspecified mode
      // x3 is thereby omitted from the fit.
      Dataset data;
      data.X = Matrix(cfg.n, 3);
      for (std::size_t i = 0; i < cfg.n; ++i) {
        data.X(i, 0) = 1.0;
        data.X(i, 1) = covs(i, 0);
        data.X(i, 2) = covs(i, 1);
      }
      data.z = z;
      data.y = y;
      data.outcome_type = OutcomeType::binary;
      data.ids.resize(cfg.n);
      for (std::size_t i = 0; i < cfg.n; ++i) data.ids[i] = std::to_string(i + 1);
      data.validate();

      const PsmRun psm = run_psm(data, cfg.match, cfg.mle,
                                 Rng::derive_seed(rep_seed, "psm-match"));
      slot.psm_att = psm.att.att;
      slot.psm_pct = match_frequency({psm.matchset}, cfg.n).pct_matched_at_least_once;

      const BpsmRun bpsm =
          run_bpsm(data, cfg.match, cfg.mcmc, cfg.mle, rep_seed, /*workers=*/1);
      slot.bpsm_att = bpsm.att.mean;
      slot.bpsm_pct =
          match_frequency(bpsm.matchsets, cfg.n).pct_matched_at_least_once;

      slot.ok = true;
    } catch (const Error& e) {
      slot.cause = e.what();
    }
  });

  SimStudyReport rep;
  rep.n = cfg.n;
  rep.J = cfg.J;
  std::vector<double> psm_est, bpsm_est, truths, psm_pct, bpsm_pct;
  for (std::size_t j = 0; j < cfg.J; ++j) {
    const RepSlot& s = slots[j];
    if (!s.ok) {
      ++rep.failed_replications;
      rep.failures.push_back(std::to_string(j) + ": " + s.cause);
      continue;
    }
    psm_est.push_back(s.psm_att);
    bpsm_est.push_back(s.bpsm_att);
    truths.push_back(s.truth);
    psm_pct.push_back(s.psm_pct);
    bpsm_pct.push_back(s.bpsm_pct);
    rep.per_replication.push_back({j, "psm", s.psm_att, s.truth});
    rep.per_replication.push_back({j, "bpsm", s.bpsm_att, s.truth});
  }

  if (static_cast<double>(rep.failed_replications) >
      cfg.max_fail_frac * static_cast<double>(cfg.J)) {
    std::size_t first = 0;
    while (first < cfg.J && slots[first].ok) ++first;
    throw ReplicationFailed(first,
                            "study: " + std::to_string(rep.failed_replications) +
                                " of " + std::to_string(cfg.J) +
                                " replications failed; first failure at " +
                                std::to_string(first) + ": " + slots[first].cause);
  }

  rep.rows.push_back(make_row("psm", psm_est, truths, psm_pct));
  rep.rows.push_back(make_row("bpsm", bpsm_est, truths, bpsm_pct));
  return rep;
}

}  // namespace un
