#include "un/config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "un/errors.hpp"

namespace un {

namespace {

using nlohmann::json;

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const char* const kKnownKeys[] = {
    "n",          "J",           "K",            "B",
    "burn_in",    "thin",        "seed",         "workers",
    "beta",       "theta0",      "theta1",       "theta2",
    "theta3",     "gamma3",      "rho",          "prior_var",
    "caliper_sd", "max_fail_frac", "misspecified", "with_replacement",
    "att_over_all_units",        "match_on",     "control_weighting",
    "gamma_true", "output_dir",  "format",       "mle_tol",
    "mle_max_iter",              "separation_threshold"};

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const char* k : kKnownKeys) {
    const std::size_t d = levenshtein(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

// Collects type problems; value setters run only on a type match.
class Reader {
 public:
  Reader(const json& root, std::vector<std::string>& problems)
      : root_(root), problems_(problems) {}

  template <typename T>
  void number(const char* key, T& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number()) {
      problems_.push_back(std::string(key) + ": expected a number");
      return;
    }
    out = v->get<double>();
  }

  template <typename T>
  void integer(const char* key, T& out, bool allow_negative) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      problems_.push_back(std::string(key) + ": expected an integer");
      return;
    }
    if (!allow_negative && v->is_number_integer() && v->get<long long>() < 0) {
      problems_.push_back(std::string(key) + ": must not be negative");
      return;
    }
    out = static_cast<T>(v->get<long long>());
  }

  void uint64(const char* key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer() && !v->is_number_unsigned()) {
      problems_.push_back(std::string(key) + ": expected an integer");
      return;
    }
    if (v->is_number_integer() && !v->is_number_unsigned() &&
        v->get<long long>() < 0) {
      problems_.push_back(std::string(key) + ": must not be negative");
      return;
    }
    out = v->get<std::uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) {
      problems_.push_back(std::string(key) + ": expected true or false");
      return;
    }
    out = v->get<bool>();
  }

  void choice(const char* key, std::string& out,
              std::initializer_list<const char*> allowed) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) {
      problems_.push_back(std::string(key) + ": expected a string");
      return;
    }
    const std::string s = v->get<std::string>();
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return s == a; }) == allowed.end()) {
      std::string msg = std::string(key) + ": must be one of";
      for (const char* a : allowed) msg += std::string(" \"") + a + "\"";
      problems_.push_back(msg + ", got \"" + s + "\"");
      return;
    }
    out = s;
  }

  void string(const char* key, std::string& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) {
      problems_.push_back(std::string(key) + ": expected a string");
      return;
    }
    out = v->get<std::string>();
  }

  void number_array(const char* key, std::size_t len, std::vector<double>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array() || v->size() != len ||
        !std::all_of(v->begin(), v->end(),
                     [](const json& e) { return e.is_number(); })) {
      problems_.push_back(std::string(key) + ": expected an array of " +
                          std::to_string(len) + " numbers");
      return;
    }
    out = v->get<std::vector<double>>();
  }

  void reject_unknown() const {
    for (const auto& item : root_.items()) {
      const std::string& key = item.key();
      const bool known =
          std::find_if(std::begin(kKnownKeys), std::end(kKnownKeys),
                       [&](const char* k) { return key == k; }) !=
          std::end(kKnownKeys);
      if (!known)
        problems_.push_back("unknown key \"" + key + "\" (did you mean \"" +
                            nearest_key(key) + "\"?)");
    }
  }

 private:
  const json* find(const char* key) const {
    const auto it = root_.find(key);
    return it == root_.end() ? nullptr : &*it;
  }

  const json& root_;
  std::vector<std::string>& problems_;
};

}  // namespace

ConfigLoadResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("config: " + path + ": " + e.what());
  }
  if (!root.is_object()) throw SchemaError("config: top level must be an object");

  ConfigLoadResult res;
  SimConfig& sim = res.config.sim;
  Reader r(root, res.problems);
  r.reject_unknown();

  r.integer("n", sim.n, /*allow_negative=*/false);
  r.integer("J", sim.J, false);
  r.integer("K", sim.mcmc.K, true);  // bound check reports K >= 2
  r.integer("B", sim.B, false);
  r.integer("burn_in", sim.mcmc.burn_in, true);
  r.integer("thin", sim.mcmc.thin, true);
  r.uint64("seed", sim.seed);
  r.integer("workers", sim.workers, true);
  r.number("beta", sim.beta);
  r.number("theta0", sim.theta0);
  r.number("theta1", sim.theta1);
  r.number("theta2", sim.theta2);
  r.number("theta3", sim.theta3);
  r.number("gamma3", sim.gamma3);
  r.number("rho", sim.rho);
  r.number("prior_var", sim.mcmc.prior_var);
  r.number("caliper_sd", sim.match.caliper_sd);
  r.number("max_fail_frac", sim.max_fail_frac);
  r.boolean("misspecified", sim.misspecified);
  r.boolean("with_replacement", sim.match.with_replacement);
  r.boolean("att_over_all_units", sim.att_over_all_units);
  r.number_array("gamma_true", 3, sim.gamma_true);
  r.string("output_dir", res.config.output_dir);
  r.number("mle_tol", sim.mle.tol);
  r.integer("mle_max_iter", sim.mle.max_iter, true);
  r.number("separation_threshold", sim.mle.separation_threshold);

  std::string match_on = "ps";
  r.choice("match_on", match_on, {"ps", "eta"});
  sim.match.match_on_linear_predictor = match_on == "eta";

  std::string weighting = "multiplicity";
  r.choice("control_weighting", weighting, {"multiplicity", "unique"});
  sim.match.weighting = weighting == "unique" ? ControlWeighting::unique
                                              : ControlWeighting::multiplicity;

  r.choice("format", res.config.format, {"csv", "json"});

  for (std::string& p : sim.problems()) res.problems.push_back(std::move(p));
  return res;
}

RunConfig load_valid_config(const std::string& path) {
  ConfigLoadResult res = load_config(path);
  if (res.problems.empty()) return res.config;
  std::string msg = "config: " + path + ":";
  for (const std::string& p : res.problems) msg += "\n  - " + p;
  throw SchemaError(msg);
}

}  // namespace un
