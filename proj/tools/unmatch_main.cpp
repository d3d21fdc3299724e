// unmatch: propensity score matching for treatment-effect estimation.
//
// Subcommands:
//   version          print the version and compiled kernel backends
//   validate-config  check a JSON config and report every problem
//   simulate         run the Monte Carlo study from a config
//   analyze          estimate the ATT on a dataset (point + posterior)
//
// Exit codes: 0 success, 2 input problem (CLI usage, config, data schema,
// UN_SEED), 3 runtime estimation failure (separation, divergence, ...).
//
// Seed precedence: --seed flag, then the UN_SEED environment variable, then
// the config value.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "un/config.hpp"
#include "un/csv.hpp"
#include "un/dataset.hpp"
#include "un/errors.hpp"
#include "un/estimator.hpp"
#include "un/kernels.hpp"
#include "un/pipeline.hpp"
#include "un/simulation.hpp"
#include "un/stats.hpp"
#include "un/version.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t parse_env_seed(const char* text) {
  std::uint64_t v = 0;
  const char* end = text + std::strlen(text);
  const auto [p, ec] = std::from_chars(text, end, v);
  if (ec != std::errc{} || p != end)
    throw un::SchemaError(
        std::string("UN_SEED must be an unsigned integer, got \"") + text +
        "\"");
  return v;
}

struct Flags {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
};

un::RunConfig effective_config(const CLI::App* sub, const Flags& f) {
  un::RunConfig rc;
  if (sub->count("--config")) rc = un::load_valid_config(f.config_path);
  if (sub->count("--seed"))
    rc.sim.seed = f.seed;
  else if (const char* env = std::getenv("UN_SEED"))
    rc.sim.seed = parse_env_seed(env);
  if (sub->count("--workers")) rc.sim.workers = f.workers;
  if (sub->count("--out")) rc.output_dir = f.out_dir;
  rc.sim.validate();
  return rc;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw un::Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int cmd_version() {
  std::cout << "unmatch " << un::kVersion << "\n";
  std::cout << "kernel backends:";
  for (const un::kernels::Backend b : un::kernels::available_backends())
    std::cout << " " << un::kernels::to_string(b);
  std::cout << " (active: " << un::kernels::to_string(un::kernels::active_backend())
            << ")\n";
  return 0;
}

int cmd_validate(const std::string& path) {
  const un::ConfigLoadResult res = un::load_config(path);
  if (res.problems.empty()) {
    std::cout << "OK\n";
    return 0;
  }
  std::cout << "invalid: " << path << "\n";
  for (const std::string& p : res.problems) std::cout << "  - " << p << "\n";
  return 2;
}

int cmd_simulate(const CLI::App* sub, const Flags& f) {
  const un::RunConfig rc = effective_config(sub, f);
  const un::SimStudyReport rep = un::run_study(rc.sim);

  const fs::path out(rc.output_dir);
  fs::create_directories(out);

  std::vector<std::vector<std::string>> rep_rows;
  json jrows = json::array();
  for (const un::MethodReport& r : rep.rows) {
    rep_rows.push_back({r.method, un::format_cell(r.pct_matched_at_least_once),
                        un::format_cell(r.att_mean), un::format_cell(r.ci_lo),
                        un::format_cell(r.ci_hi), un::format_cell(r.bias),
                        un::format_cell(r.mab), un::format_cell(r.rmse)});
    jrows.push_back({{"method", r.method},
                     {"pct_matched_at_least_once", r.pct_matched_at_least_once},
                     {"att_mean", r.att_mean},
                     {"ci_lo", r.ci_lo},
                     {"ci_hi", r.ci_hi},
                     {"bias", r.bias},
                     {"mab", r.mab},
                     {"rmse", r.rmse}});
  }
  un::write_csv((out / "report.csv").string(),
                {"method", "pct_matched_at_least_once", "att_mean", "ci_lo",
                 "ci_hi", "bias", "mab", "rmse"},
                rep_rows);
  write_json_file(out / "report.json", json{{"n", rep.n},
                                            {"J", rep.J},
                                            {"failed_replications",
                                             rep.failed_replications},
                                            {"failures", rep.failures},
                                            {"rows", jrows}});

  std::vector<std::vector<std::string>> pr_rows;
  json jpr = json::array();
  for (const un::PerReplication& r : rep.per_replication) {
    pr_rows.push_back({std::to_string(r.j), r.method,
                       un::format_cell(r.att_estimate),
                       un::format_cell(r.true_att)});
    if (rc.format == "json")
      jpr.push_back({{"j", r.j},
                     {"method", r.method},
                     {"att_estimate", r.att_estimate},
                     {"true_att", r.true_att}});
  }
  un::write_csv((out / "per_replication.csv").string(),
                {"j", "method", "att_estimate", "true_att"}, pr_rows);
  if (rc.format == "json") write_json_file(out / "per_replication.json", jpr);

  std::cout << "replications: " << (rep.J - rep.failed_replications) << " of "
            << rep.J << " succeeded\n";
  std::cout << "method matched%  att_mean     ci_lo     ci_hi      bias       "
               "mab      rmse  (x100 scale)\n";
  char buf[160];
  for (const un::MethodReport& r : rep.rows) {
    std::snprintf(buf, sizeof buf,
                  "%-6s %8.2f %9.3f %9.3f %9.3f %9.3f %9.3f %9.3f",
                  r.method.c_str(), r.pct_matched_at_least_once, r.att_mean,
                  r.ci_lo, r.ci_hi, r.bias, r.mab, r.rmse);
    std::cout << buf << "\n";
  }
  std::cout << "wrote " << (out / "report.csv").string() << ", "
            << (out / "report.json").string() << ", "
            << (out / "per_replication.csv").string() << "\n";
  return 0;
}

int cmd_analyze(const CLI::App* sub, const Flags& f) {
  const un::RunConfig rc = effective_config(sub, f);
  const un::Dataset data = un::load_dataset_csv(f.data_path);
  const std::uint64_t seed = rc.sim.seed;

  const un::PsmRun psm = un::run_psm(data, rc.sim.match, rc.sim.mle,
                                     un::Rng::derive_seed(seed, "psm-match"));
  const un::BootstrapSe boot = un::bootstrap_se(
      data, rc.sim.match, rc.sim.mle, rc.sim.B, seed, rc.sim.workers);
  const un::BpsmRun bpsm = un::run_bpsm(data, rc.sim.match, rc.sim.mcmc,
                                        rc.sim.mle, seed, rc.sim.workers);

  const un::MatchFrequency psm_freq =
      un::match_frequency({psm.matchset}, data.n());
  const un::MatchFrequency bpsm_freq =
      un::match_frequency(bpsm.matchsets, data.n());
  const std::vector<un::DropKeepRow> keep =
      un::drop_keep_export(psm.scores, psm.matchset, data);
  const std::vector<un::Summary> ps_post =
      un::posterior_ps_summary(bpsm.draws, data.X);

  const fs::path out(rc.output_dir);
  fs::create_directories(out);

  const json att = json::array(
      {{{"method", "psm"},
        {"att", psm.att.att},
        {"se", boot.se},
        {"ci_lo", un::percentile(boot.replicates, 0.025)},
        {"ci_hi", un::percentile(boot.replicates, 0.975)},
        {"pct_matched_at_least_once", psm_freq.pct_matched_at_least_once}},
       {{"method", "bpsm"},
        {"att", bpsm.att.mean},
        {"se", bpsm.att.sd},
        {"ci_lo", bpsm.att.ci_lo},
        {"ci_hi", bpsm.att.ci_hi},
        {"pct_matched_at_least_once", bpsm_freq.pct_matched_at_least_once}}});
  write_json_file(out / "att.json", att);

  std::vector<std::vector<std::string>> draw_rows;
  json jdraws = json::array();
  for (std::size_t b = 0; b < boot.replicates.size(); ++b) {
    draw_rows.push_back(
        {"psm_boot", std::to_string(b), un::format_cell(boot.replicates[b])});
    if (rc.format == "json")
      jdraws.push_back({{"method", "psm_boot"},
                        {"index", b},
                        {"att", boot.replicates[b]}});
  }
  for (std::size_t k = 0; k < bpsm.att.sample.size(); ++k) {
    draw_rows.push_back(
        {"bpsm", std::to_string(k), un::format_cell(bpsm.att.sample[k])});
    if (rc.format == "json")
      jdraws.push_back(
          {{"method", "bpsm"}, {"index", k}, {"att", bpsm.att.sample[k]}});
  }
  un::write_csv((out / "att_draws.csv").string(), {"method", "index", "att"},
                draw_rows);
  if (rc.format == "json") write_json_file(out / "att_draws.json", jdraws);

  std::vector<std::vector<std::string>> freq_rows;
  json jfreq = json::array();
  for (std::size_t i = 0; i < data.n(); ++i) {
    freq_rows.push_back({std::to_string(i), data.ids[i],
                         std::to_string(static_cast<int>(data.z[i])),
                         keep[i].kept ? "1" : "0",
                         un::format_cell(bpsm_freq.fraction[i])});
    if (rc.format == "json")
      jfreq.push_back({{"unit", i},
                       {"id", data.ids[i]},
                       {"z", static_cast<int>(data.z[i])},
                       {"psm_kept", keep[i].kept},
                       {"bpsm_fraction", bpsm_freq.fraction[i]}});
  }
  un::write_csv((out / "match_frequency.csv").string(),
                {"unit", "id", "z", "psm_kept", "bpsm_fraction"}, freq_rows);
  if (rc.format == "json") write_json_file(out / "match_frequency.json", jfreq);

  std::vector<std::vector<std::string>> post_rows;
  json jpost = json::array();
  for (std::size_t i = 0; i < data.n(); ++i) {
    post_rows.push_back({std::to_string(i),
                         std::to_string(static_cast<int>(data.z[i])),
                         un::format_cell(ps_post[i].mean),
                         un::format_cell(ps_post[i].p025),
                         un::format_cell(ps_post[i].p975)});
    if (rc.format == "json")
      jpost.push_back({{"unit", i},
                       {"z", static_cast<int>(data.z[i])},
                       {"ps_mean", ps_post[i].mean},
                       {"ps_lo", ps_post[i].p025},
                       {"ps_hi", ps_post[i].p975}});
  }
  un::write_csv((out / "ps_posterior.csv").string(),
                {"unit", "z", "ps_mean", "ps_lo", "ps_hi"}, post_rows);
  if (rc.format == "json") write_json_file(out / "ps_posterior.json", jpost);

  std::vector<std::vector<std::string>> keep_rows;
  json jkeep = json::array();
  for (const un::DropKeepRow& r : keep) {
    keep_rows.push_back({std::to_string(r.unit), un::format_cell(r.ps),
                         r.kept ? "1" : "0", std::to_string(r.z)});
    if (rc.format == "json")
      jkeep.push_back(
          {{"unit", r.unit}, {"ps", r.ps}, {"kept", r.kept}, {"z", r.z}});
  }
  un::write_csv((out / "drop_keep.csv").string(), {"unit", "ps", "kept", "z"},
                keep_rows);
  if (rc.format == "json") write_json_file(out / "drop_keep.json", jkeep);

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "psm   att=%+.6f  se=%.6f  ci=[%+.6f, %+.6f]  matched>=once: "
                "%.1f%%",
                psm.att.att, boot.se, un::percentile(boot.replicates, 0.025),
                un::percentile(boot.replicates, 0.975),
                psm_freq.pct_matched_at_least_once);
  std::cout << buf << "\n";
  std::snprintf(buf, sizeof buf,
                "bpsm  att=%+.6f  se=%.6f  ci=[%+.6f, %+.6f]  matched>=once: "
                "%.1f%%",
                bpsm.att.mean, bpsm.att.sd, bpsm.att.ci_lo, bpsm.att.ci_hi,
                bpsm_freq.pct_matched_at_least_once);
  std::cout << buf << "\n";
  std::cout << "mcmc acceptance rate: " << bpsm.draws.acceptance_rate << "\n";
  if (boot.failed > 0)
    std::cout << "bootstrap: " << boot.failed << " of " << boot.B
              << " replicates failed and were dropped\n";
  std::cout << "wrote " << (out / "att.json").string()
            << " and the matching/posterior tables\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"propensity score matching (point-estimate and posterior) for "
               "ATT estimation"};
  app.require_subcommand(1);

  Flags f;

  CLI::App* version = app.add_subcommand("version", "print version and backends");

  CLI::App* validate =
      app.add_subcommand("validate-config", "check a JSON config file");
  validate->add_option("--config", f.config_path, "config file")->required();

  CLI::App* simulate =
      app.add_subcommand("simulate", "run the Monte Carlo study");
  simulate->add_option("--config", f.config_path, "JSON config");
  simulate->add_option("--out", f.out_dir, "output directory");
  simulate->add_option("--seed", f.seed, "master seed");
  simulate->add_option("--workers", f.workers, "worker threads")
      ->check(CLI::PositiveNumber);

  CLI::App* analyze = app.add_subcommand("analyze", "estimate the ATT");
  analyze->add_option("--data", f.data_path, "dataset CSV (id,z,y,x1..xp)")
      ->required();
  analyze->add_option("--config", f.config_path, "JSON config");
  analyze->add_option("--out", f.out_dir, "output directory");
  analyze->add_option("--seed", f.seed, "master seed");
  analyze->add_option("--workers", f.workers, "worker threads")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    un::kernels::set_backend_auto();
    if (version->parsed()) return cmd_version();
    if (validate->parsed()) return cmd_validate(f.config_path);
    if (simulate->parsed()) return cmd_simulate(simulate, f);
    if (analyze->parsed()) return cmd_analyze(analyze, f);
  } catch (const un::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const un::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
