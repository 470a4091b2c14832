#pragma once

// Subcommand dispatcher for the entroset binary. Exit codes: 0 success,
// 1 violated inequality or breached identity, 2 usage or input error.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entroset/coupling.hpp"
#include "entroset/entropy.hpp"
#include "entroset/error.hpp"
#include "entroset/harness.hpp"
#include "entroset/json_io.hpp"
#include "entroset/magnification.hpp"
#include "entroset/method_of_types.hpp"

namespace entroset::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::uint64_t kDefaultSeed = 1;

/// Usage-level failure raised while interpreting flags.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Explicit flag, else ENTROSET_SEED, else the default.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ENTROSET_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError(std::string("ENTROSET_SEED is not an unsigned integer: ") + env);
    return v;
  }
  return kDefaultSeed;
}

/// Inline JSON when the argument starts with '{' or '[', otherwise a file path.
inline nlohmann::json load_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      return nlohmann::json::parse(arg);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("malformed inline JSON: ") + e.what());
    }
  }
  std::ifstream f(arg);
  if (!f) throw UsageError("cannot read '" + arg + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed JSON in '" + arg + "': " + e.what());
  }
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw UsageError("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("expected a comma-separated list of numbers");
  return out;
}

inline LinearForm parse_form(const std::string& s) {
  if (s == "sum") return LinearForm::sum();
  if (s == "diff" || s == "difference") return LinearForm::difference();
  std::vector<std::int64_t> c;
  for (double v : parse_doubles(s)) {
    if (v != std::round(v)) throw UsageError("form coefficients must be integers");
    c.push_back(static_cast<std::int64_t>(v));
  }
  if (c.size() != 2) throw UsageError("form must have two coefficients");
  return LinearForm(c);
}

/// "all", "ge:i:t" (nu_i >= t) or "le:i:t" (nu_i <= t).
inline SanovEvent parse_event(const std::string& s, std::size_t m) {
  if (s == "all") return [](std::span<const double>) { return true; };
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw UsageError("event must be all, ge:i:t or le:i:t");
  const auto op = s.substr(0, c1);
  const auto idx = parse_doubles(s.substr(c1 + 1, c2 - c1 - 1)).at(0);
  const auto t = parse_doubles(s.substr(c2 + 1)).at(0);
  if (idx < 0 || idx != std::round(idx) || static_cast<std::size_t>(idx) >= m) {
    throw UsageError("event index out of range");
  }
  const auto i = static_cast<std::size_t>(idx);
  if (op == "ge") return [i, t](std::span<const double> nu) { return nu[i] >= t - 1e-12; };
  if (op == "le") return [i, t](std::span<const double> nu) { return nu[i] <= t + 1e-12; };
  throw UsageError("event operator must be ge or le");
}

inline double render(double nats, bool bits) { return bits ? nats_to_bits(nats) : nats; }

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text(path, text);
  }
}

inline void emit_json(const std::string& path, const nlohmann::json& report, std::ostream& out) {
  emit(path, canonical_json(report) + "\n", out);
}

struct Options {
  // shared
  std::optional<std::uint64_t> seed;
  std::string out_path;
  double tol = 0.0;
  bool bits = false;
  bool coupling = false;
  // verify
  std::string id;
  std::uint64_t trials = 1000;
  std::size_t max_support = 5;
  unsigned jobs = 1;
  // magnify
  std::string graph;
  std::size_t starts = 20;
  // dhr / maxent / growth
  std::string px;
  std::string py;
  std::string form = "sum";
  // sanov / growth / types
  std::string mu;
  std::string event = "all";
  std::string ns;
  std::int64_t n = 0;
  std::int64_t n_max = 0;
  std::optional<double> omega;
  bool counts = false;
  std::int64_t m = 0;
  bool list = false;
  // witnesses
  std::uint64_t budget = 2000;
};

inline std::vector<std::int64_t> parse_ns(const std::string& s) {
  std::vector<std::int64_t> out;
  for (double v : parse_doubles(s)) {
    if (v < 1 || v != std::round(v)) throw UsageError("block lengths must be positive integers");
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

inline int run_verify(const Options& o, std::ostream& out) {
  HarnessConfig cfg;
  cfg.tol = o.tol > 0 ? o.tol : 1e-8;
  cfg.max_support = o.max_support;
  if (cfg.max_support == 0) throw UsageError("--max-support must be positive");
  const auto seed = resolve_seed(o.seed);
  std::vector<std::string> ids;
  if (o.id == "all") {
    ids = registry_ids();
  } else {
    try {
      ids.push_back(find_inequality(o.id).id);
    } catch (const InvalidArgumentError& e) {
      throw UsageError(e.what());
    }
  }
  nlohmann::json reports = nlohmann::json::array();
  std::uint64_t violations = 0;
  for (const auto& id : ids) {
    const auto rep = run_suite(id, o.trials, seed, cfg, std::nullopt, o.jobs);
    violations += rep.violations;
    reports.push_back(to_json(rep));
  }
  const nlohmann::json config{{"id", o.id}, {"trials", o.trials}, {"seed", seed}, {"tol", cfg.tol},
                              {"max_support", cfg.max_support}};
  auto result = o.id == "all" ? nlohmann::json{{"reports", reports}, {"violations", violations}} : reports[0];
  emit_json(o.out_path, envelope("verify", config, result), out);
  return violations == 0 ? kExitOk : kExitViolation;
}

inline int run_magnify(const Options& o, std::ostream& out) {
  const auto g = graph_from_json(load_json(o.graph));
  LambdaOptions lo;
  if (o.tol > 0) lo.tol = o.tol;
  lo.starts = o.starts;
  lo.seed = resolve_seed(o.seed);
  const auto mu = mu_combinatorial(g);
  const auto lam = lambda_entropic(g, lo);
  const double log_mu = std::log(mu.mu.value());
  nlohmann::json subset = nlohmann::json::array();
  for (auto a : mu.argmin) subset.push_back(g.left_labels()[a]);
  nlohmann::json px = nlohmann::json::object();
  for (std::size_t a = 0; a < g.left_size(); ++a) px[g.left_labels()[a]] = lam.px[a];
  const nlohmann::json result{{"mu", mu.mu.str()},
                              {"log_mu", render(log_mu, o.bits)},
                              {"lambda", render(lam.value, o.bits)},
                              {"argmin_subset", subset},
                              {"discrepancy_flag", lam.discrepancy},
                              {"exhaustive_value", render(lam.exhaustive_value, o.bits)},
                              {"gradient_value", render(lam.gradient_value, o.bits)},
                              {"px", px},
                              {"units", o.bits ? "bits" : "nats"}};
  const nlohmann::json config{{"graph", to_json(g)}, {"tol", lo.tol}, {"starts", lo.starts}, {"seed", lo.seed}};
  emit_json(o.out_path, envelope("magnify", config, result), out);
  return std::abs(lam.value - log_mu) <= 1e-3 ? kExitOk : kExitViolation;
}

inline int run_dhr(const Options& o, std::ostream& out) {
  const auto px = dist_from_json(load_json(o.px));
  const auto py = dist_from_json(load_json(o.py));
  const double tol = o.tol > 0 ? o.tol : 1e-8;
  const auto d = d_hr_detail(px, py, tol);
  auto solve = to_json(d.solve, o.coupling);
  solve["value"] = render(d.solve.value, o.bits);
  const nlohmann::json result{{"d_hr", render(d.value, o.bits)},
                              {"d_r", render(ruzsa_distance(px.support_set(), py.support_set()), o.bits)},
                              {"h_x", render(px.entropy(), o.bits)},
                              {"h_y", render(py.entropy(), o.bits)},
                              {"max_entropy", solve},
                              {"units", o.bits ? "bits" : "nats"}};
  const nlohmann::json config{{"px", to_json(px)}, {"py", to_json(py)}, {"tol", tol}};
  emit_json(o.out_path, envelope("dhr", config, result), out);
  return kExitOk;
}

inline int run_maxent(const Options& o, std::ostream& out) {
  const auto px = dist_from_json(load_json(o.px));
  const auto py = dist_from_json(load_json(o.py));
  const auto f = parse_form(o.form);
  const double tol = o.tol > 0 ? o.tol : 1e-8;
  const auto r = max_pushforward_entropy(px, py, f, tol);
  auto result = to_json(r, o.coupling);
  result["value"] = render(r.value, o.bits);
  result["units"] = o.bits ? "bits" : "nats";
  const nlohmann::json config{{"px", to_json(px)},
                              {"py", to_json(py)},
                              {"form", std::vector<std::int64_t>(f.coefficients().begin(), f.coefficients().end())},
                              {"tol", tol}};
  emit_json(o.out_path, envelope("maxent", config, result), out);
  return kExitOk;
}

inline int run_sanov(const Options& o, std::ostream& out) {
  const auto mu = parse_doubles(o.mu);
  double s = 0.0;
  for (double p : mu) {
    if (!(p >= 0.0)) throw UsageError("probabilities must be non-negative");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw UsageError("mu must sum to 1");
  const auto event = parse_event(o.event, mu.size());
  std::vector<std::int64_t> ns;
  if (!o.ns.empty()) {
    ns = parse_ns(o.ns);
  } else {
    const auto top = o.n_max > 0 ? o.n_max : (o.n > 0 ? o.n : 12);
    for (std::int64_t k = o.n_max > 0 ? 1 : top; k <= top; ++k) ns.push_back(k);
  }
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (auto n : ns) {
    const auto r = sanov_exact(mu, event, n);
    ok = ok && r.within_bounds();
    rows.push_back({std::to_string(n), csv_number(r.rate), csv_number(r.lower_bound), csv_number(r.upper_bound)});
  }
  emit(o.out_path, csv({"n", "rate", "lower_bound", "upper_bound"}, rows), out);
  return ok ? kExitOk : kExitViolation;
}

inline int run_growth(const Options& o, std::ostream& out) {
  const auto px = dist_from_json(load_json(o.px));
  const auto py = dist_from_json(load_json(o.py));
  const auto ns = parse_ns(o.ns.empty() ? "4,8,16,32,64" : o.ns);
  std::vector<std::vector<std::string>> rows;
  for (auto n : ns) {
    const auto g = sumset_growth(px, py, n, o.omega ? *o.omega : default_omega(n));
    std::vector<std::string> row{std::to_string(n), csv_number(g.rate)};
    if (o.counts) row.push_back(to_decimal(g.count));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header{"n", "rate"};
  if (o.counts) header.emplace_back("count");
  emit(o.out_path, csv(header, rows), out);
  return kExitOk;
}

inline int run_witnesses(const Options& o, std::ostream& out) {
  const auto seed = resolve_seed(o.seed);
  const double tol = o.tol > 0 ? o.tol : 1e-9;
  const auto w = ordering_witnesses(o.budget, seed, tol);
  const nlohmann::json config{{"budget", o.budget}, {"seed", seed}, {"tol", tol}, {"margin", kWitnessMargin}};
  emit_json(o.out_path, envelope("witnesses", config, to_json(w)), out);
  return w.complete() ? kExitOk : kExitViolation;
}

inline int run_types(const Options& o, std::ostream& out) {
  if (o.m <= 0 || o.n < 0) throw UsageError("--m must be positive and --n non-negative");
  const auto expected = count_types(o.m, o.n);
  nlohmann::json result{{"m", o.m}, {"n", o.n}, {"count", to_decimal(expected)}};
  bool ok = true;
  if (o.list) {
    nlohmann::json types = nlohmann::json::array();
    for_each_type(o.m, o.n, [&](const TypeVector& t) {
      nlohmann::json row{{"counts", t.counts}, {"class_size", to_decimal(type_class_size(t))}};
      if (!o.mu.empty()) {
        const auto mu = parse_doubles(o.mu);
        if (mu.size() != static_cast<std::size_t>(o.m)) throw UsageError("--mu must have m entries");
        row["log2_probability"] = type_log_probability(mu, t);
      }
      types.push_back(std::move(row));
    });
    ok = BigInt(types.size()) == expected;
    result["types"] = std::move(types);
  }
  emit_json(o.out_path, envelope("types", {{"m", o.m}, {"n", o.n}, {"list", o.list}}, result), out);
  return ok ? kExitOk : kExitViolation;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"entroset: sumsets, entropic inequalities and coupling optimisation", "entroset"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Options o;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "RNG seed (default: ENTROSET_SEED, else 1)"); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out_path, "output path (default: stdout)"); };
  auto add_tol = [&](CLI::App* c) { c->add_option("--tol", o.tol, "solver tolerance")->check(CLI::PositiveNumber); };

  auto* verify = app.add_subcommand("verify", "fuzz a registered inequality (or 'all')");
  verify->add_option("id", o.id, "inequality id")->required();
  verify->add_option("--trials", o.trials, "number of trials");
  verify->add_option("--max-support", o.max_support, "support size cap");
  verify->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_seed(verify);
  add_tol(verify);
  add_out(verify);

  auto* magnify = app.add_subcommand("magnify", "magnification ratio and its entropic counterpart");
  magnify->add_option("--graph", o.graph, "graph JSON file or inline JSON")->required();
  magnify->add_option("--starts", o.starts, "gradient restarts");
  magnify->add_flag("--bits", o.bits, "report logs in bits");
  add_seed(magnify);
  add_tol(magnify);
  add_out(magnify);

  auto* dhr = app.add_subcommand("dhr", "entropic Ruzsa distance");
  dhr->add_option("--px", o.px, "distribution JSON")->required();
  dhr->add_option("--py", o.py, "distribution JSON")->required();
  dhr->add_flag("--coupling", o.coupling, "include the optimal coupling");
  dhr->add_flag("--bits", o.bits, "report logs in bits");
  add_tol(dhr);
  add_out(dhr);

  auto* maxent = app.add_subcommand("maxent", "maximise H(aX + bY) over couplings");
  maxent->add_option("--px", o.px, "distribution JSON")->required();
  maxent->add_option("--py", o.py, "distribution JSON")->required();
  maxent->add_option("--form", o.form, "sum, diff, or 'a,b'");
  maxent->add_flag("--coupling", o.coupling, "include the optimal coupling");
  maxent->add_flag("--bits", o.bits, "report logs in bits");
  add_tol(maxent);
  add_out(maxent);

  auto* sanov = app.add_subcommand("sanov", "exact type-class probabilities of an event (CSV, bits)");
  sanov->add_option("--mu", o.mu, "comma-separated probabilities")->required();
  sanov->add_option("--event", o.event, "all, ge:i:t or le:i:t");
  sanov->add_option("--n", o.n, "single block length");
  sanov->add_option("--n-max", o.n_max, "series n = 1..N");
  sanov->add_option("--ns", o.ns, "comma-separated block lengths");
  add_out(sanov);

  auto* growth = app.add_subcommand("growth", "(1/n) log2 |A_n + B_n| for typical sets (CSV)");
  growth->add_option("--px", o.px, "distribution JSON")->required();
  growth->add_option("--py", o.py, "distribution JSON")->required();
  growth->add_option("--ns", o.ns, "comma-separated block lengths (default 4,8,16,32,64)");
  growth->add_option("--omega", o.omega, "fixed band width (default n^-1/4)");
  growth->add_flag("--counts", o.counts, "append the exact count column");
  add_out(growth);

  auto* witnesses = app.add_subcommand("witnesses", "instances with d_HR < d_R and d_HR > d_R");
  witnesses->add_option("--budget", o.budget, "trial budget")->check(CLI::PositiveNumber);
  add_seed(witnesses);
  add_tol(witnesses);
  add_out(witnesses);

  auto* types = app.add_subcommand("types", "count or list the types of length n");
  types->add_option("--m", o.m, "alphabet size")->required();
  types->add_option("--n", o.n, "block length")->required();
  types->add_flag("--list", o.list, "list every type with its class size");
  types->add_option("--mu", o.mu, "with --list, also give log2 P_mu(type)");
  add_out(types);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return run_verify(o, out);
    if (magnify->parsed()) return run_magnify(o, out);
    if (dhr->parsed()) return run_dhr(o, out);
    if (maxent->parsed()) return run_maxent(o, out);
    if (sanov->parsed()) return run_sanov(o, out);
    if (growth->parsed()) return run_growth(o, out);
    if (witnesses->parsed()) return run_witnesses(o, out);
    if (types->parsed()) return run_types(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace entroset::cli
