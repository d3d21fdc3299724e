// End-to-end tests that drive the installed binary through a shell, checking
// exit codes, output files, and cross-file consistency.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "un/rng.hpp"
#include "un/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "un_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// env_prefix example: "UN_SEED=99". The binary path comes from the build.
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path out = work_dir() / ("stdout" + std::to_string(counter));
  const fs::path err = work_dir() / ("stderr" + std::to_string(counter));
  ++counter;
  std::string cmd = "env " + (env_prefix.empty() ? "" : env_prefix + " ") +
                    std::string(UNMATCH_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << content;
  return p.string();
}

// Tiny but valid study settings so each simulate call stays fast.
std::string quick_sim_config(std::uint64_t seed) {
  return write_file("sim" + std::to_string(seed) + ".json",
                    R"({"n": 150, "J": 4, "K": 30, "burn_in": 150, "thin": 1,
                        "seed": )" +
                        std::to_string(seed) + "}");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string header_of(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

// A dataset the analyze command can load, produced by the library's own
// generator and serialized by hand.
std::string make_dataset(std::size_t n, std::uint64_t seed) {
  un::Rng rng(seed);
  const un::Matrix covs = un::gen_covariates(n, 0.25, false, rng);
  const std::vector<double> gamma = {-6.0, 2.0, 1.0};
  const std::vector<double> theta = {0.0, 2.0, -2.0};
  const std::vector<double> z = un::gen_treatment(covs, gamma, rng);
  const std::vector<double> y = un::gen_outcome(covs, z, 1.0, theta, rng);

  std::ostringstream ss;
  ss << "id,z,y,x1,x2\n";
  for (std::size_t i = 0; i < n; ++i)
    ss << (i + 1) << "," << static_cast<int>(z[i]) << ","
       << static_cast<int>(y[i]) << "," << static_cast<int>(covs(i, 0)) << ","
       << static_cast<int>(covs(i, 1)) << "\n";
  return write_file("data" + std::to_string(seed) + ".csv", ss.str());
}

}  // namespace

TEST_CASE("version prints the backends and exits cleanly") {
  const RunResult r = run_cli("version");
  CHECK(r.code == 0);
  CHECK(r.out.find("unmatch") != std::string::npos);
  CHECK(r.out.find("scalar") != std::string::npos);
  CHECK(r.out.find("active:") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2 and help exits 0") {
  CHECK(run_cli("").code == 2);                 // a subcommand is required
  CHECK(run_cli("frobnicate").code == 2);       // unknown subcommand
  CHECK(run_cli("validate-config").code == 2);  // missing --config
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("simulate --help").code == 0);
}

TEST_CASE("validate-config reports OK or every problem") {
  const std::string good = quick_sim_config(1);
  const RunResult ok = run_cli("validate-config --config " + good);
  CHECK(ok.code == 0);
  CHECK(ok.out.find("OK") != std::string::npos);

  const std::string bad = write_file(
      "bad.json", R"({"seeed": 7, "n": 20, "match_on": "propensity"})");
  const RunResult r = run_cli("validate-config --config " + bad);
  CHECK(r.code == 2);
  CHECK(r.out.find("invalid:") != std::string::npos);
  CHECK(r.out.find("did you mean \"seed\"?") != std::string::npos);
  CHECK(r.out.find("match_on") != std::string::npos);
  CHECK(r.out.find("n") != std::string::npos);

  const std::string broken = write_file("broken.json", "{ nope");
  const RunResult r2 = run_cli("validate-config --config " + broken);
  CHECK(r2.code == 2);
}

TEST_CASE("simulate writes the report files with the documented schemas") {
  const std::string cfg = quick_sim_config(11);
  const fs::path out = work_dir() / "sim_out";
  const RunResult r =
      run_cli("simulate --config " + cfg + " --out " + out.string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("replications:") != std::string::npos);

  CHECK(header_of(out / "report.csv") ==
        "method,pct_matched_at_least_once,att_mean,ci_lo,ci_hi,bias,mab,rmse");
  const auto rep = read_csv(out / "report.csv");
  REQUIRE(rep.size() == 3);
  CHECK(rep[1][0] == "psm");
  CHECK(rep[2][0] == "bpsm");
  // Cells carry six significant digits, so orderings hold up to rounding.
  for (std::size_t row = 1; row <= 2; ++row) {
    const double rmse = std::stod(rep[row][7]);
    const double mab = std::stod(rep[row][6]);
    const double bias = std::stod(rep[row][5]);
    CHECK(rmse >= mab - 1e-3);
    CHECK(mab >= std::fabs(bias) - 1e-3);
  }

  CHECK(header_of(out / "per_replication.csv") ==
        "j,method,att_estimate,true_att");
  const auto pr = read_csv(out / "per_replication.csv");
  const json report = json::parse(slurp(out / "report.json"));
  CHECK(report["n"] == 150);
  CHECK(report["J"] == 4);
  REQUIRE(report["rows"].size() == 2);
  CHECK(report["rows"][0]["method"] == "psm");
  const std::size_t succeeded =
      4 - report["failed_replications"].get<std::size_t>();
  CHECK(pr.size() == 1 + 2 * succeeded);

  // The stdout table mirrors report.csv at lower precision.
  CHECK(r.out.find("psm") != std::string::npos);
  CHECK(r.out.find("bpsm") != std::string::npos);
}

TEST_CASE("simulate is deterministic in the master seed") {
  const std::string cfg = quick_sim_config(21);
  const fs::path o1 = work_dir() / "det1";
  const fs::path o2 = work_dir() / "det2";
  const fs::path o3 = work_dir() / "det3";
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + o1.string()).code == 0);
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + o2.string()).code == 0);
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + o3.string() +
                  " --seed 999").code == 0);
  CHECK(slurp(o1 / "report.csv") == slurp(o2 / "report.csv"));
  CHECK(slurp(o1 / "per_replication.csv") == slurp(o2 / "per_replication.csv"));
  CHECK(slurp(o1 / "report.csv") != slurp(o3 / "report.csv"));
}

TEST_CASE("the seed flag beats the environment which beats the config") {
  const std::string cfg = quick_sim_config(31);  // config seed 31
  const fs::path base = work_dir() / "seed_base";
  const fs::path env = work_dir() / "seed_env";
  const fs::path flag = work_dir() / "seed_flag";
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + base.string()).code == 0);
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + env.string(),
                  "UN_SEED=4040").code == 0);
  REQUIRE(run_cli("simulate --config " + cfg + " --out " + flag.string() +
                  " --seed 31", "UN_SEED=4040").code == 0);
  CHECK(slurp(base / "report.csv") != slurp(env / "report.csv"));
  CHECK(slurp(base / "report.csv") == slurp(flag / "report.csv"));

  const RunResult bad = run_cli("simulate --config " + cfg, "UN_SEED=banana");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("UN_SEED") != std::string::npos);
}

TEST_CASE("the kernel backend override is honored and validated") {
  const RunResult scalar = run_cli("version", "UN_KERNEL=scalar");
  CHECK(scalar.code == 0);
  CHECK(scalar.out.find("active: scalar") != std::string::npos);

  const RunResult bogus = run_cli("version", "UN_KERNEL=sse9");
  CHECK(bogus.code == 2);
  CHECK(bogus.err.find("UN_KERNEL") != std::string::npos);
}

TEST_CASE("analyze writes consistent estimate and diagnostic tables") {
  const std::size_t n = 240;
  const std::string data = make_dataset(n, 505);
  const std::string cfg = write_file(
      "an.json",
      R"({"K": 200, "burn_in": 400, "thin": 1, "B": 60, "seed": 7})");
  const fs::path out = work_dir() / "an_out";
  const RunResult r = run_cli("analyze --data " + data + " --config " + cfg +
                              " --out " + out.string());
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("psm") != std::string::npos);
  CHECK(r.out.find("bpsm") != std::string::npos);
  CHECK(r.out.find("acceptance rate") != std::string::npos);

  const json att = json::parse(slurp(out / "att.json"));
  REQUIRE(att.size() == 2);
  CHECK(att[0]["method"] == "psm");
  CHECK(att[1]["method"] == "bpsm");
  for (const json& row : att) {
    const double a = row["att"].get<double>();
    CHECK(a >= -1.0);
    CHECK(a <= 1.0);
    CHECK(row["se"].get<double>() >= 0.0);
    CHECK(row["ci_lo"].get<double>() <= row["ci_hi"].get<double>());
    CHECK(row["pct_matched_at_least_once"].get<double>() >= 0.0);
    CHECK(row["pct_matched_at_least_once"].get<double>() <= 100.0);
  }

  // att_draws.csv must reproduce the posterior summary and bootstrap se.
  CHECK(header_of(out / "att_draws.csv") == "method,index,att");
  std::vector<double> boot, post;
  const auto draws = read_csv(out / "att_draws.csv");
  for (std::size_t i = 1; i < draws.size(); ++i) {
    REQUIRE(draws[i].size() == 3);
    if (draws[i][0] == "psm_boot")
      boot.push_back(std::stod(draws[i][2]));
    else if (draws[i][0] == "bpsm")
      post.push_back(std::stod(draws[i][2]));
  }
  CHECK(post.size() == 200);
  CHECK(boot.size() <= 60);
  CHECK(boot.size() >= 54);  // at most a few bootstrap failures
  CHECK(std::fabs(att[1]["att"].get<double>() - oracle::mean(post)) < 1e-5);
  CHECK(std::fabs(att[1]["se"].get<double>() - oracle::sd(post)) < 1e-5);
  CHECK(std::fabs(att[1]["ci_lo"].get<double>() -
                  oracle::percentile(post, 0.025)) < 1e-5);
  CHECK(std::fabs(att[1]["ci_hi"].get<double>() -
                  oracle::percentile(post, 0.975)) < 1e-5);
  CHECK(std::fabs(att[0]["se"].get<double>() - oracle::sd(boot)) < 1e-5);
  CHECK(std::fabs(att[0]["ci_lo"].get<double>() -
                  oracle::percentile(boot, 0.025)) < 1e-5);

  CHECK(header_of(out / "match_frequency.csv") ==
        "unit,id,z,psm_kept,bpsm_fraction");
  const auto freq = read_csv(out / "match_frequency.csv");
  REQUIRE(freq.size() == 1 + n);
  for (std::size_t i = 1; i < freq.size(); ++i) {
    CHECK(freq[i][0] == std::to_string(i - 1));
    CHECK_UNARY(freq[i][2] == "0" || freq[i][2] == "1");
    CHECK_UNARY(freq[i][3] == "0" || freq[i][3] == "1");
    const double frac = std::stod(freq[i][4]);
    CHECK(frac >= 0.0);
    CHECK(frac <= 1.0);
  }

  CHECK(header_of(out / "ps_posterior.csv") == "unit,z,ps_mean,ps_lo,ps_hi");
  const auto post_rows = read_csv(out / "ps_posterior.csv");
  REQUIRE(post_rows.size() == 1 + n);
  for (std::size_t i = 1; i < post_rows.size(); ++i) {
    const double m = std::stod(post_rows[i][2]);
    const double lo = std::stod(post_rows[i][3]);
    const double hi = std::stod(post_rows[i][4]);
    CHECK(m > 0.0);
    CHECK(m < 1.0);
    CHECK(lo <= m + 1e-5);  // six-digit cells
    CHECK(m <= hi + 1e-5);
  }

  CHECK(header_of(out / "drop_keep.csv") == "unit,ps,kept,z");
  const auto keep = read_csv(out / "drop_keep.csv");
  REQUIRE(keep.size() == 1 + n);
  std::size_t kept_count = 0;
  for (std::size_t i = 1; i < keep.size(); ++i) {
    CHECK(keep[i][0] == std::to_string(i - 1));
    const double ps = std::stod(keep[i][1]);
    CHECK(ps > 0.0);
    CHECK(ps < 1.0);
    CHECK_UNARY(keep[i][2] == "0" || keep[i][2] == "1");
    kept_count += keep[i][2] == "1";
  }
  CHECK(kept_count > 0);
}

TEST_CASE("analyze is deterministic and worker-count invariant") {
  const std::string data = make_dataset(200, 606);
  const std::string cfg = write_file(
      "anw.json", R"({"K": 120, "burn_in": 200, "thin": 1, "B": 40, "seed": 3})");
  const fs::path o1 = work_dir() / "anw1";
  const fs::path o2 = work_dir() / "anw2";
  const fs::path o3 = work_dir() / "anw3";
  REQUIRE(run_cli("analyze --data " + data + " --config " + cfg + " --out " +
                  o1.string()).code == 0);
  REQUIRE(run_cli("analyze --data " + data + " --config " + cfg + " --out " +
                  o2.string()).code == 0);
  REQUIRE(run_cli("analyze --data " + data + " --config " + cfg + " --out " +
                  o3.string() + " --workers 3").code == 0);
  CHECK(slurp(o1 / "att.json") == slurp(o2 / "att.json"));
  CHECK(slurp(o1 / "att_draws.csv") == slurp(o2 / "att_draws.csv"));
  CHECK(slurp(o1 / "att.json") == slurp(o3 / "att.json"));
  CHECK(slurp(o1 / "att_draws.csv") == slurp(o3 / "att_draws.csv"));
  CHECK(slurp(o1 / "match_frequency.csv") == slurp(o3 / "match_frequency.csv"));
}

TEST_CASE("analyze rejects datasets it cannot estimate from") {
  const std::string all_treated = write_file(
      "all_treated.csv", "id,z,y,x1,x2\na,1,0,1,3\nb,1,1,0,2\nc,1,0,1,5\n");
  const RunResult r = run_cli("analyze --data " + all_treated);
  CHECK(r.code == 2);
  CHECK(r.err.find("control") != std::string::npos);

  const RunResult missing = run_cli("analyze --data /nonexistent/x.csv");
  CHECK(missing.code == 2);

  const std::string bad_header = write_file(
      "bad_header.csv", "id,treat,y,x1\na,1,0,1\nb,0,1,0\n");
  const RunResult r2 = run_cli("analyze --data " + bad_header);
  CHECK(r2.code == 2);
}

TEST_CASE("json format mirrors the auxiliary tables") {
  const std::string data = make_dataset(160, 707);
  const std::string cfg = write_file(
      "anj.json",
      R"({"K": 60, "burn_in": 120, "thin": 1, "B": 20, "seed": 5,
          "format": "json"})");
  const fs::path out = work_dir() / "an_json";
  REQUIRE(run_cli("analyze --data " + data + " --config " + cfg + " --out " +
                  out.string()).code == 0);
  for (const char* name :
       {"att_draws.json", "match_frequency.json", "ps_posterior.json",
        "drop_keep.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(out / name));
    const json j = json::parse(slurp(out / name));
    CHECK(j.is_array());
    CHECK(!j.empty());
  }
  const json freq = json::parse(slurp(out / "match_frequency.json"));
  CHECK(freq.size() == 160);

  const std::string scfg = write_file(
      "simj.json",
      R"({"n": 150, "J": 3, "K": 25, "burn_in": 100, "thin": 1, "seed": 8,
          "format": "json"})");
  const fs::path sout = work_dir() / "sim_json";
  REQUIRE(run_cli("simulate --config " + scfg + " --out " + sout.string())
              .code == 0);
  const json pr = json::parse(slurp(sout / "per_replication.json"));
  CHECK(pr.is_array());
  CHECK(pr.size() % 2 == 0);
}
