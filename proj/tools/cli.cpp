#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>

#include <CLI11.hpp>

#include "sense/conditions.hpp"
#include "sense/evaluation.hpp"
#include "sense/io.hpp"
#include "sense/policies.hpp"
#include "sense/random_spec.hpp"
#include "sense/verifier.hpp"

namespace sense::cli {

namespace {

struct Common {
  std::string instance;
  bool timestamp = false;
};

struct CheckOptions {
  bool csv = false;
  std::string out;
  std::optional<double> beta;
};

struct EvalOptions {
  std::string policy = "myopic";
  int horizon = -1;
  std::optional<double> beta;
  bool optimal = false;
  bool infinite = false;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t budget = 10'000'000;
  std::string out;
};

struct SimulateOptions {
  std::string policy = "myopic";
  int horizon = 10;
  std::optional<double> beta;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool compare = false;
  std::string out;
};

struct GittinsOptions {
  std::optional<double> beta;
  bool grid = false;
  std::optional<int> trace;
  bool assert_coincide = false;
  std::string out;
};

struct VerifyOptions {
  std::vector<std::string> random;
  int depth = 4;
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  std::size_t configs = 200;
};

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Loaded {
  ProblemSpec spec;
  std::string hash;
};

Loaded load(const std::string& path, const std::optional<double>& beta) {
  Loaded l;
  l.hash = fnv1a_hex(read_file(path));
  l.spec = load_instance(path);
  if (beta) l.spec = with_discount(l.spec, *beta);
  return l;
}

RunManifest manifest(const std::string& command, const Common& common, const std::string& hash,
                     Json config, std::optional<std::uint64_t> seed = std::nullopt) {
  RunManifest m;
  m.command = command;
  config["instance"] = common.instance;
  m.config = std::move(config);
  m.seed = seed;
  m.input_hash = hash;
  if (common.timestamp) m.timestamp = now_utc();
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError(path + ": cannot open for writing");
  f << text;
}

// A CSV file is accompanied by <path>.manifest.json.
void write_csv(const std::string& path, const std::string& csv, const Json& manifest_json) {
  write_text(path, csv);
  write_text(path + ".manifest.json", manifest_json.dump(2) + "\n");
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

Json beta_json(const std::optional<double>& beta) {
  return beta ? Json(*beta) : Json(nullptr);
}

int cmd_check(const Common& common, const CheckOptions& o, std::ostream& out) {
  const Loaded l = load(common.instance, o.beta);
  const ConditionReport report = check_conditions(l.spec);
  Json config = {{"csv", o.csv}, {"out", o.out}, {"beta", beta_json(o.beta)}};
  const Json man = to_json(manifest("check", common, l.hash, config));
  Json j = to_json(report);
  j["label"] = l.spec.label;
  j["discount"] = l.spec.discount;
  j["manifest"] = man;

  std::vector<std::string> header, row;
  for (const auto& [k, v] : report.margins) {
    header.push_back(k);
    row.push_back(format_double(v));
  }
  const std::string csv = csv_row(header) + csv_row(row);
  if (!o.out.empty()) {
    write_csv(o.out, csv, man);
    j["csv"] = o.out;
  }
  if (o.csv && o.out.empty()) {
    out << csv;
  } else {
    emit(out, j);
  }
  if (report.a4_indeterminate) return kDegenerate;
  return report.all_ok() ? kOk : kSemanticFailure;
}

int cmd_eval(const Common& common, const EvalOptions& o, std::ostream& out) {
  if (!o.infinite && o.horizon < 0) throw InvalidArgument("--horizon is required (or --infinite)");
  const Loaded l = load(common.instance, o.beta);
  const ProblemSpec& spec = l.spec;
  auto policy = make_policy(o.policy, spec, o.seed);
  DpOptions dp;
  dp.node_budget = o.budget;

  Json j;
  j["policy"] = policy->name();
  j["beta"] = spec.discount;
  double value = 0.0;
  std::optional<double> optimal;
  int horizon = o.horizon;
  if (o.infinite) {
    const InfiniteHorizonValue v = infinite_horizon_value(spec, policy.get(), o.epsilon, dp);
    value = v.value;
    horizon = v.horizon;
    j["truncation_bound"] = v.truncation_bound;
    j["nodes"] = v.stats.nodes;
    if (o.optimal) optimal = infinite_horizon_value(spec, nullptr, o.epsilon, dp).value;
  } else {
    const ValueResult v = policy_value_dp(spec, horizon, *policy, dp);
    value = v.value;
    j["nodes"] = v.stats.nodes;
    if (o.optimal) optimal = optimal_value_dp(spec, horizon, dp).value;
  }
  j["horizon"] = horizon;
  j["value"] = value;
  if (optimal) {
    j["optimal_value"] = *optimal;
    j["gap"] = *optimal - value;
  }
  Json config = {{"policy", o.policy},   {"horizon", o.horizon}, {"beta", beta_json(o.beta)},
                 {"optimal", o.optimal}, {"infinite", o.infinite}, {"epsilon", o.epsilon},
                 {"budget", o.budget},   {"out", o.out}};
  const Json man = to_json(manifest("eval", common, l.hash, config, o.seed));
  j["manifest"] = man;
  if (!o.out.empty()) {
    std::string csv = csv_row({"policy", "horizon", "beta", "value", "optimal_value", "gap"});
    csv += csv_row({policy->name(), std::to_string(horizon), format_double(spec.discount),
                    format_double(value), optimal ? format_double(*optimal) : "",
                    optimal ? format_double(*optimal - value) : ""});
    write_csv(o.out, csv, man);
    j["csv"] = o.out;
  }
  emit(out, j);
  return kOk;
}

int cmd_simulate(const Common& common, const SimulateOptions& o, std::ostream& out) {
  if (o.reps < 1) throw InvalidArgument("--reps must be at least 1");
  if (o.horizon < 0) throw InvalidArgument("--horizon must be non-negative");
  const Loaded l = load(common.instance, o.beta);
  auto policy = make_policy(o.policy, l.spec, o.seed);
  const SimulationReport rep = simulate(l.spec, *policy, o.horizon, o.reps, o.seed, o.threads);

  Json config = {{"policy", o.policy}, {"horizon", o.horizon}, {"beta", beta_json(o.beta)},
                 {"reps", o.reps},     {"compare", o.compare}, {"out", o.out}};
  const Json man = to_json(manifest("simulate", common, l.hash, config, o.seed));
  Json j;
  j["policy"] = rep.policy;
  j["horizon"] = o.horizon;
  j["beta"] = l.spec.discount;
  j["replications"] = rep.replications;
  j["seed"] = rep.seed;
  j["mean"] = rep.mean;
  j["se"] = rep.standard_error;
  if (o.compare) {
    auto exact_policy = make_policy(o.policy, l.spec, o.seed);
    const double exact = policy_value_dp(l.spec, o.horizon, *exact_policy).value;
    j["dp_value"] = exact;
    j["z"] = rep.standard_error > 0.0 ? (rep.mean - exact) / rep.standard_error
                                      : (rep.mean == exact ? 0.0 : INFINITY);
  }
  j["manifest"] = man;
  if (!o.out.empty()) {
    std::string csv = csv_row({"replication", "total_discounted_reward"});
    for (std::size_t r = 0; r < rep.totals.size(); ++r) {
      csv += csv_row({std::to_string(r), format_double(rep.totals[r])});
    }
    write_csv(o.out, csv, man);
    j["csv"] = o.out;
  }
  emit(out, j);
  return kOk;
}

int cmd_gittins(const Common& common, const GittinsOptions& o, std::ostream& out) {
  const Loaded l = load(common.instance, o.beta);
  const ProblemSpec& spec = l.spec;
  if (spec.discount >= 1.0) {
    throw DegenerateComputation("the Gittins index needs a discount below 1 (use --beta)");
  }
  if (o.assert_coincide && spec.threshold != spec.n_states) {
    throw ScopeError("coincidence of the Gittins and myopic rules is only established for L = K");
  }
  const bool grid = o.grid || !o.trace;
  Json config = {{"beta", beta_json(o.beta)},
                 {"grid", grid},
                 {"trace", o.trace ? Json(*o.trace) : Json(nullptr)},
                 {"assert_coincide", o.assert_coincide},
                 {"out", o.out}};
  const Json man = to_json(manifest("gittins", common, l.hash, config));
  Json j;
  j["beta"] = spec.discount;
  std::string csv;
  int code = kOk;
  if (grid) {
    csv += csv_row({"kind", "id", "index", "in_band"});
    Json channels = Json::array();
    for (int n = 1; n <= spec.n_channels; ++n) {
      const Pmf& pmf = spec.initial_pmfs[n - 1];
      const double nu = gittins_index(pmf, spec);
      const bool band = gittins_in_band(pmf, spec);
      channels.push_back({{"channel", n}, {"pmf", vector_json(pmf.probs())}, {"index", nu},
                          {"in_band", band}});
      csv += csv_row({"channel", std::to_string(n), format_double(nu), band ? "true" : "false"});
    }
    Json rows = Json::array();
    for (int i = 1; i <= spec.n_states; ++i) {
      const Pmf& row = spec.transition.row(i);
      const double nu = gittins_index(row, spec);
      const bool band = gittins_in_band(row, spec);
      rows.push_back({{"state", i}, {"index", nu}, {"in_band", band}});
      csv += csv_row({"row", std::to_string(i), format_double(nu), band ? "true" : "false"});
    }
    j["channels"] = channels;
    j["rows"] = rows;
  }
  if (o.trace) {
    if (spec.threshold != spec.n_states) {
      j["warning"] = "coincidence is only established for L = K";
    }
    const auto steps = agreement_by_step(spec, *o.trace);
    Json arr = Json::array();
    std::size_t nodes = 0, disagreements = 0;
    if (!csv.empty()) csv += "\n";
    csv += csv_row({"t", "beliefs", "disagreements", "agreement", "excluded"});
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const auto& s = steps[t];
      const double agree = s.nodes == 0 ? 1.0
                                        : 1.0 - static_cast<double>(s.disagreements) / s.nodes;
      arr.push_back({{"t", t}, {"beliefs", s.nodes}, {"disagreements", s.disagreements},
                     {"agreement", agree}, {"excluded", t == 0}});
      csv += csv_row({std::to_string(t), std::to_string(s.nodes), std::to_string(s.disagreements),
                      format_double(agree), t == 0 ? "true" : "false"});
      if (t > 0) {
        nodes += s.nodes;
        disagreements += s.disagreements;
      }
    }
    const double overall = nodes == 0 ? 1.0 : 1.0 - static_cast<double>(disagreements) / nodes;
    j["trace"] = arr;
    j["agreement_after_t0"] = overall;
    if (o.assert_coincide && disagreements > 0) code = kSemanticFailure;
  }
  j["manifest"] = man;
  if (!o.out.empty()) {
    write_csv(o.out, csv, man);
    j["csv"] = o.out;
  }
  emit(out, j);
  return code;
}

int cmd_verify(const Common& common, const VerifyOptions& o, std::ostream& out) {
  VerifyConfig cfg;
  cfg.seed = o.seed;
  cfg.depth = o.depth;
  cfg.samples = o.samples;
  cfg.configurations = o.configs;
  cfg.theorem_horizon = std::min(o.depth, 3);

  Json j;
  ProblemSpec spec;
  std::string hash;
  Json config = {{"depth", o.depth}, {"samples", o.samples}, {"configs", o.configs}};
  if (!o.random.empty()) {
    if (o.random.size() != 6) throw InvalidArgument("--random takes K N L beta seed attempts");
    RandomSpecRequest req;
    try {
      req.n_states = std::stoi(o.random[0]);
      req.n_channels = std::stoi(o.random[1]);
      req.threshold = std::stoi(o.random[2]);
      req.discount = std::stod(o.random[3]);
      req.seed = std::stoull(o.random[4]);
      req.attempts = std::stoull(o.random[5]);
    } catch (const std::logic_error&) {
      throw InvalidArgument("--random takes K N L beta seed attempts");
    }
    req.constraint = SpecConstraint::TryA1toA4;
    config["random"] = o.random;
    const RandomSpecResult res = random_spec(req);
    Json gen = {{"constraint", to_string(req.constraint)},
                {"attempts_used", res.attempts_used},
                {"acceptance_rate", res.acceptance_rate()}};
    if (!res.spec) {
      gen["rejection"] = res.rejection;
      j["generator"] = gen;
      j["manifest"] = to_json(manifest("verify", common, "", config, o.seed));
      emit(out, j);
      return kSamplingExhausted;
    }
    spec = *res.spec;
    hash = fnv1a_hex(spec_to_json(spec).dump());
    j["generator"] = gen;
  } else {
    if (common.instance.empty()) throw InvalidArgument("verify needs an instance or --random");
    const Loaded l = load(common.instance, std::nullopt);
    spec = l.spec;
    hash = l.hash;
  }
  const auto reports = verify_all(spec, cfg);
  const bool ok = all_passed(reports);
  j["spec"] = spec_to_json(spec);
  j["passed"] = ok;
  j["reports"] = to_json(reports);
  j["manifest"] = to_json(manifest("verify", common, hash, config, o.seed));
  emit(out, j);
  return ok ? kOk : kSemanticFailure;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return kParseError;
  if (dynamic_cast<const DegenerateComputation*>(&e)) return kDegenerate;
  if (dynamic_cast<const BudgetExceeded*>(&e)) return kBudget;
  if (dynamic_cast<const IncomparableBeliefs*>(&e)) return kIncomparable;
  if (dynamic_cast<const ScopeError*>(&e)) return kScope;
  return kParseError;  // invalid arguments and dimension errors are usage errors
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Channel sensing policies for restless multi-state channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  Common common;
  CheckOptions check;
  EvalOptions eval;
  SimulateOptions sim;
  GittinsOptions git;
  VerifyOptions ver;

  auto add_common = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("instance", common.instance, "instance JSON file");
    if (required) opt->required();
    sub->add_flag("--timestamp", common.timestamp, "record the wall-clock time in the manifest");
  };

  auto* c = app.add_subcommand("check", "check the sufficient conditions A1-A4");
  add_common(c, true);
  c->add_flag("--csv", check.csv, "print a one-row margins table instead of JSON");
  c->add_option("--out", check.out, "write the margins table to this CSV file");
  c->add_option("--beta", check.beta, "override the discount factor");

  auto* e = app.add_subcommand("eval", "exact value of a policy by belief-tree recursion");
  add_common(e, true);
  e->add_option("--policy", eval.policy,
                "myopic | myopic_fallback | gittins | ordering:<perm> | ordering:sorted | "
                "fixed:<n> | round_robin | random");
  e->add_option("--horizon", eval.horizon, "last time step T");
  e->add_option("--beta", eval.beta, "override the discount factor");
  e->add_flag("--optimal", eval.optimal, "also compute the optimal value and the gap");
  e->add_flag("--infinite", eval.infinite, "truncated infinite-horizon value (discount < 1)");
  e->add_option("--epsilon", eval.epsilon, "truncation tolerance for --infinite");
  e->add_option("--seed", eval.seed, "seed for randomized policies");
  e->add_option("--budget", eval.budget, "belief-tree node budget");
  e->add_option("--out", eval.out, "CSV output path");

  auto* s = app.add_subcommand("simulate", "Monte Carlo rollouts of a policy");
  add_common(s, true);
  s->add_option("--policy", sim.policy, "policy name (as for eval)");
  s->add_option("--horizon", sim.horizon, "last time step T");
  s->add_option("--beta", sim.beta, "override the discount factor");
  s->add_option("--reps", sim.reps, "number of replications");
  s->add_option("--seed", sim.seed, "base seed");
  s->add_option("--threads", sim.threads, "worker threads (0 = hardware concurrency)");
  s->add_flag("--compare", sim.compare, "also report the exact value and the z-score");
  s->add_option("--out", sim.out, "CSV of per-replication totals");

  auto* g = app.add_subcommand("gittins", "closed-form Gittins indices and rule comparison");
  add_common(g, true);
  g->add_option("--beta", git.beta, "override the discount factor");
  g->add_flag("--grid", git.grid, "index of each channel's PMF and of each row of P");
  g->add_option("--trace", git.trace, "compare Gittins and myopic actions up to this horizon");
  g->add_flag("--assert-coincide", git.assert_coincide,
              "fail unless the two rules agree after time zero");
  g->add_option("--out", git.out, "CSV output path");

  auto* v = app.add_subcommand("verify", "run every property battery");
  add_common(v, false);
  v->add_option("--random", ver.random, "K N L beta seed attempts")->expected(6);
  v->add_option("--depth", ver.depth, "largest horizon of the exact recursions");
  v->add_option("--seed", ver.seed, "seed of the property samplers");
  v->add_option("--samples", ver.samples, "samples per sampled property");
  v->add_option("--configs", ver.configs, "configurations per recursion property");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? kOk : kParseError;
  }

  try {
    if (c->parsed()) return cmd_check(common, check, out);
    if (e->parsed()) return cmd_eval(common, eval, out);
    if (s->parsed()) return cmd_simulate(common, sim, out);
    if (g->parsed()) return cmd_gittins(common, git, out);
    if (v->parsed()) return cmd_verify(common, ver, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex);
  }
  return kParseError;
}

}  // namespace sense::cli
