#include "sense/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <unordered_set>

#include "sense/conditions.hpp"
#include "sense/evaluation.hpp"
#include "sense/policies.hpp"
#include "sense/random.hpp"
#include "sense/random_spec.hpp"

namespace sense {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Passed: return "passed";
    case CheckStatus::Failed: return "failed";
    case CheckStatus::Skipped: return "skipped";
  }
  return "unknown";
}

namespace {

Eigen::RowVectorXd row_from(const Json& v) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return out;
}

Eigen::MatrixXd matrix_from(const Json& v) {
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(v[0].size()) : 0;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) out.row(i) = row_from(v[i]);
  return out;
}

ChannelOrdering ordering_from(const Json& v) { return ChannelOrdering(v.get<std::vector<int>>()); }

Json ordering_json(const ChannelOrdering& o) { return o.order(); }

double pairwise_comparability(const Eigen::MatrixXd& beliefs) {
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < beliefs.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < beliefs.rows(); ++b) {
      const double ab = dominance_margin(beliefs.row(a), beliefs.row(b));
      const double ba = dominance_margin(beliefs.row(b), beliefs.row(a));
      worst = std::min(worst, std::max(ab, ba));
    }
  }
  return worst;
}

double case_p1(const ProblemSpec& spec, const Json& c) {
  const Eigen::RowVectorXd x = row_from(c["x"]);
  const Eigen::RowVectorXd y = row_from(c["y"]);
  return dominance_margin(x * spec.p(), y * spec.p());
}

double case_p2(const ProblemSpec& spec, const Json& c) {
  const Eigen::RowVectorXd x2 = row_from(c["x"]) * spec.p() * spec.p();
  const int l = spec.threshold;
  return std::min(dominance_margin(spec.p().row(l - 1), x2),
                  dominance_margin(x2, spec.p().row(l - 2)));
}

double case_p3(const ProblemSpec& spec, const Json& c) {
  Eigen::MatrixXd beliefs(spec.n_channels, spec.n_states);
  for (int n = 0; n < spec.n_channels; ++n) beliefs.row(n) = spec.initial_pmfs[n].probs();
  double worst = pairwise_comparability(beliefs);
  for (const auto& step : c["path"]) {
    const int channel = step[0].get<int>();
    const int state = step[1].get<int>();
    beliefs = (beliefs * spec.p()).eval();
    beliefs.row(channel - 1) = spec.p().row(state - 1);
    worst = std::min(worst, pairwise_comparability(beliefs));
  }
  return worst;
}

double case_p4(const ProblemSpec& spec, const Json& c) {
  const Eigen::RowVectorXd d = row_from(c["x"]) - row_from(c["y"]);
  const Eigen::VectorXd v = row_from(c["v"]).transpose();
  const DerivedRewards q = compute_derived(spec);
  const Eigen::VectorXd& r = spec.r();
  const double beta = spec.discount;
  const Eigen::RowVectorXd dp = d * spec.p();
  double m = d.dot(v);                                       // (i)
  m = std::min(m, d.dot(q.M) - d.dot(q.U));                  // (ii)
  m = std::min(m, d.dot(q.U) - d.dot(r));
  m = std::min(m, d.dot(r));
  m = std::min(m, d.dot(q.M) - beta * dp.dot(q.M));          // (iii)
  if (c.value("agree", std::string("none")) != "none") {     // (iv)
    m = std::min(m, d.dot(r) - beta * dp.dot(q.M));
    m = std::min(m, beta * dp.dot(q.M) - beta * dp.dot(q.U));
  }
  return m;
}

double case_p5(const ProblemSpec& spec, const Json& c) {
  const int horizon = c["horizon"].get<int>();
  const BeliefState b0 = initial_belief(spec);
  const double ordered = ordering_value(dominance_ordering(b0), belief_matrix(b0), spec, 0, horizon);
  MyopicPolicy myopic;
  const double dp = policy_value_dp(spec, horizon, myopic).value;
  return -std::abs(ordered - dp);
}

struct OrderingCase {
  Eigen::MatrixXd beliefs;
  ChannelOrdering ordering;
  int n = 0;
  int m = 0;
  int horizon = 0;
};

OrderingCase ordering_case(const Json& c) {
  return {matrix_from(c["beliefs"]), ordering_from(c["ordering"]), c["n"].get<int>(),
          c["m"].get<int>(), c["horizon"].get<int>()};
}

// P6 and P7: 0 <= L(O) - L(O') <= (pi_hat - pi^1) bound.
double case_gain_gap(const ProblemSpec& spec, const Json& c, bool use_swap) {
  const OrderingCase oc = ordering_case(c);
  const Eigen::RowVectorXd pi_hat = row_from(c["pi_hat"]);
  const ChannelOrdering other =
      use_swap ? swap(oc.ordering, oc.n, oc.m) : shift_ccw(oc.ordering, oc.m);
  const double gap = ordering_value_diff(oc.ordering, pi_hat, oc.beliefs, spec, 0, oc.horizon) -
                     ordering_value_diff(other, pi_hat, oc.beliefs, spec, 0, oc.horizon);
  const Eigen::VectorXd u = compute_U(spec);
  const Eigen::VectorXd bound_vec = use_swap ? compute_M(spec, u) : u;
  const double bound = (pi_hat - oc.beliefs.row(0)).dot(bound_vec);
  return std::min(gap, bound - gap);
}

double case_p8(const ProblemSpec& spec, const Json& c) {
  const OrderingCase oc = ordering_case(c);
  return ordering_value(oc.ordering, oc.beliefs, spec, 0, oc.horizon) -
         ordering_value(swap(oc.ordering, oc.n, oc.m), oc.beliefs, spec, 0, oc.horizon);
}

double case_p9(const ProblemSpec& spec, const Json& c) {
  const OrderingCase oc = ordering_case(c);
  const double lifted = ordering_value(lift(oc.ordering, oc.n, oc.m), oc.beliefs, spec, 0, oc.horizon) -
                        ordering_value(oc.ordering, oc.beliefs, spec, 0, oc.horizon);
  const int channels = static_cast<int>(oc.beliefs.rows());
  const double bound = compute_h(spec) -
                       oc.beliefs.row(0) * matrix_power(spec.transition, channels - oc.n) * spec.r();
  return bound - lifted;
}

double case_l1(const ProblemSpec& spec, const Json& c) {
  const OrderingCase oc = ordering_case(c);
  const int i = c["i"].get<int>();
  const int j = c["j"].get<int>();
  const double alpha = c["alpha"].get<double>();
  const int k = spec.n_states;
  const Eigen::RowVectorXd ei = Eigen::RowVectorXd::Unit(k, i - 1);
  const Eigen::RowVectorXd ej = Eigen::RowVectorXd::Unit(k, j - 1);
  const Eigen::RowVectorXd mix = alpha * ei + (1.0 - alpha) * ej;
  auto l = [&](const Eigen::RowVectorXd& pi_hat) {
    return ordering_value_diff(oc.ordering, pi_hat, oc.beliefs, spec, 0, oc.horizon);
  };
  return -std::abs(l(mix) - (alpha * l(ei) + (1.0 - alpha) * l(ej)));
}

DpOptions budget_options(const Json& c) {
  DpOptions o;
  o.node_budget = c.value("node_budget", std::size_t{10'000'000});
  return o;
}

double case_t1(const ProblemSpec& spec, const Json& c) {
  const int horizon = c["horizon"].get<int>();
  MyopicPolicy myopic;
  const double mv = policy_value_dp(spec, horizon, myopic, budget_options(c)).value;
  const double ov = optimal_value_dp(spec, horizon, budget_options(c)).value;
  return -std::abs(mv - ov);
}

double case_t2(const ProblemSpec& spec, const Json& c) {
  const double eps = c["epsilon"].get<double>();
  MyopicPolicy myopic;
  const double mv = infinite_horizon_value(spec, &myopic, eps, budget_options(c)).value;
  const double ov = infinite_horizon_value(spec, nullptr, eps, budget_options(c)).value;
  return -std::abs(mv - ov);
}

double case_t3(const ProblemSpec& spec, const Json& c) {
  const int horizon = c["horizon"].get<int>();
  return optimal_value_dp(spec, horizon + 1, budget_options(c)).value -
         optimal_value_dp(spec, horizon, budget_options(c)).value;
}

double case_t4(const ProblemSpec& spec, const Json& c) {
  return -static_cast<double>(gittins_myopic_agreement(spec, c["horizon"].get<int>()).disagreements);
}

}  // namespace

double case_tolerance(const std::string& id, const Json& payload) {
  if (id == "L1") return 1e-12;
  if (id == "T2") return 2.0 * payload["epsilon"].get<double>();
  if (id == "T4") return 0.0;
  return kConditionTol;
}

double evaluate_case(const std::string& id, const Json& payload) {
  const ProblemSpec spec = spec_from_json(payload.at("spec"));
  if (id == "P1") return case_p1(spec, payload);
  if (id == "P2") return case_p2(spec, payload);
  if (id == "P3") return case_p3(spec, payload);
  if (id == "P4") return case_p4(spec, payload);
  if (id == "P5") return case_p5(spec, payload);
  if (id == "P6") return case_gain_gap(spec, payload, false);
  if (id == "P7") return case_gain_gap(spec, payload, true);
  if (id == "P8") return case_p8(spec, payload);
  if (id == "P9") return case_p9(spec, payload);
  if (id == "L1") return case_l1(spec, payload);
  if (id == "T1") return case_t1(spec, payload);
  if (id == "T2") return case_t2(spec, payload);
  if (id == "T3") return case_t3(spec, payload);
  if (id == "T4") return case_t4(spec, payload);
  throw InvalidArgument("unknown property id '" + id + "'");
}

std::vector<AgreementCount> agreement_by_step(const ProblemSpec& spec, int horizon) {
  if (horizon < 0) throw InvalidArgument("agreement horizon must be non-negative");
  const BeliefTable table(spec, horizon);
  std::vector<AgreementCount> out(static_cast<std::size_t>(horizon) + 1);
  std::vector<std::vector<Provenance>> level{initial_belief(spec).provenance()};
  for (int t = 0; t <= horizon; ++t) {
    if (t > 0) {
      std::unordered_set<NodeKey, NodeKeyHash> seen;
      std::vector<std::vector<Provenance>> next;
      for (const auto& prov : level) {
        for (int n = 1; n <= spec.n_channels; ++n) {
          const Pmf& pmf = table.pmf(prov[n - 1]);
          for (int i = 1; i <= spec.n_states; ++i) {
            if (pmf.at(i) <= 0.0) continue;
            auto child = advance(prov, n, i);
            if (seen.insert(node_key(t, child)).second) next.push_back(std::move(child));
          }
        }
      }
      level = std::move(next);
    }
    AgreementCount& count = out[static_cast<std::size_t>(t)];
    for (const auto& prov : level) {
      const BeliefState belief = table.materialize(prov);
      ++count.nodes;
      try {
        if (myopic_action(belief).channel != gittins_action(belief, spec, t).channel) {
          ++count.disagreements;
        }
      } catch (const IncomparableBeliefs&) {
        ++count.disagreements;
      }
    }
  }
  return out;
}

AgreementCount gittins_myopic_agreement(const ProblemSpec& spec, int horizon) {
  if (horizon < 1) throw InvalidArgument("agreement horizon must be at least 1");
  const auto steps = agreement_by_step(spec, horizon);
  AgreementCount total;
  for (std::size_t t = 1; t < steps.size(); ++t) {
    total.nodes += steps[t].nodes;
    total.disagreements += steps[t].disagreements;
  }
  return total;
}

namespace {

class Battery {
 public:
  Battery(std::string id, std::string description, const VerifyConfig& cfg)
      : cfg_(cfg) {
    report_.id = std::move(id);
    report_.description = std::move(description);
    report_.status = CheckStatus::Passed;
  }

  void skip(std::string reason) {
    report_.status = CheckStatus::Skipped;
    report_.reason = std::move(reason);
  }

  bool skipped() const { return report_.status == CheckStatus::Skipped; }

  void run(Json payload) {
    double margin = 0.0;
    try {
      margin = evaluate_case(report_.id, payload);
    } catch (const BudgetExceeded& e) {
      ++budget_aborts_;
      return;
    }
    const double tol = case_tolerance(report_.id, payload);
    report_.tolerance = tol;
    ++report_.samples;
    report_.worst_margin = std::min(report_.worst_margin, margin);
    if (margin < -tol) {
      ++report_.failure_count;
      if (report_.failures.size() < cfg_.max_recorded_failures) {
        report_.failures.push_back({std::move(payload), margin});
      }
    }
  }

  void note(std::string text) { report_.notes.push_back(std::move(text)); }

  PropertyReport finish() {
    if (budget_aborts_ > 0) {
      note(std::to_string(budget_aborts_) + " sample(s) aborted on the node budget");
      if (report_.samples == 0 && !skipped()) skip("every sample exceeded the node budget");
    }
    if (!skipped() && report_.failure_count > 0) report_.status = CheckStatus::Failed;
    return std::move(report_);
  }

 private:
  const VerifyConfig& cfg_;
  PropertyReport report_;
  std::size_t budget_aborts_ = 0;
};

Json base_payload(const ProblemSpec& spec) {
  Json p;
  p["spec"] = spec_to_json(spec);
  return p;
}

// Random ordered subset of {1..N} of the given size, kept in increasing
// order so that a dominance chain of initial PMFs stays a chain.
std::vector<int> random_subset(Rng& rng, int n, int size) {
  std::vector<int> perm = random_permutation(rng, n);
  perm.resize(size);
  std::sort(perm.begin(), perm.end());
  return perm;
}

// Hull PMFs as weight vectors over the rows (so dominance between weights
// carries over to the PMFs under A1).
Eigen::RowVectorXd hull_weights(Rng& rng, int k) { return dirichlet_flat(rng, k); }

Eigen::MatrixXd hull_beliefs(Rng& rng, const ProblemSpec& spec, int channels) {
  Eigen::MatrixXd b(channels, spec.n_states);
  for (int n = 0; n < channels; ++n) b.row(n) = hull_weights(rng, spec.n_states) * spec.p();
  return b;
}

// Ordering with channel 1 at position n.
ChannelOrdering ordering_with_one_at(Rng& rng, int channels, int n) {
  std::vector<int> rest = random_permutation(rng, channels);
  rest.erase(std::find(rest.begin(), rest.end(), 1));
  rest.insert(rest.begin() + (n - 1), 1);
  return ChannelOrdering(std::move(rest));
}

// Chain-ordered mixtures of consecutive rows.
std::vector<Eigen::RowVectorXd> chain_of_rows(Rng& rng, const ProblemSpec& spec, int channels) {
  const int k = spec.n_states;
  std::vector<double> u(channels);
  for (auto& x : u) x = uniform(rng, 0.0, static_cast<double>(k - 1));
  std::sort(u.begin(), u.end());
  std::vector<Eigen::RowVectorXd> out;
  for (double x : u) {
    const int j = std::min(static_cast<int>(x), k - 2);
    const double a = x - j;
    out.push_back((1.0 - a) * spec.p().row(j) + a * spec.p().row(j + 1));
  }
  return out;
}

ProblemSpec with_initials(const ProblemSpec& spec, std::vector<Eigen::RowVectorXd> initial) {
  return make_spec(spec.p(), spec.r(), std::move(initial), spec.threshold, spec.discount,
                   spec.label);
}

struct Gates {
  ConditionReport report;
  bool a1 = false;
  bool a1to3 = false;
  bool a1to4 = false;
};

constexpr const char* kNeedA1 = "requires A1";
constexpr const char* kNeedA1to3 = "requires A1-A3";
constexpr const char* kNeedA1to4 = "requires A1-A4";

std::string format_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

int pick(Rng& rng, int lo, int hi) { return uniform_int(rng, lo, hi); }

PropertyReport gate_report(const Gates& g) {
  PropertyReport r;
  r.id = "conditions";
  r.description = "conditions A1-A4";
  r.samples = 1;
  r.tolerance = kConditionTol;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& [key, value] : g.report.margins) r.worst_margin = std::min(r.worst_margin, value);
  r.status = g.a1to4 ? CheckStatus::Passed : CheckStatus::Failed;
  for (const auto& v : g.report.failures) r.notes.push_back(v.condition + " violated: " + v.inequality);
  if (g.report.a4_indeterminate) r.notes.push_back("A4 indeterminate: " + g.report.degenerate_reason);
  if (!g.a1to4) r.failure_count = std::max<std::size_t>(1, g.report.failures.size());
  return r;
}

}  // namespace

std::vector<PropertyReport> verify_all(const ProblemSpec& spec, const VerifyConfig& cfg) {
  spec.validate();
  const int k = spec.n_states;
  const int l = spec.threshold;
  Gates g;
  g.report = check_conditions(spec);
  g.a1 = g.report.a1_ok;
  g.a1to3 = g.report.a1_ok && g.report.a2_ok && g.report.a3_ok;
  g.a1to4 = g.report.all_ok();

  std::vector<PropertyReport> out;
  out.push_back(gate_report(g));
  auto rng_for = [&](std::uint64_t stream) { return Rng(derive_seed(cfg.seed, stream)); };
  const int depth = std::max(0, cfg.depth);
  const int max_ch = std::max(2, cfg.max_channels);

  {  // P1
    Battery b("P1", "x >=st y implies xP >=st yP", cfg);
    if (!g.a1) {
      b.skip(kNeedA1);
    } else {
      Rng rng = rng_for(1);
      for (std::size_t s = 0; s < cfg.samples; ++s) {
        const Eigen::RowVectorXd y = dirichlet_flat(rng, k);
        const Eigen::RowVectorXd x = dominating_join(y, dirichlet_flat(rng, k));
        Json p = base_payload(spec);
        p["x"] = vector_json(x);
        p["y"] = vector_json(y);
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // P2
    Battery b("P2", "P_L >=st xP^2 >=st P_{L-1}", cfg);
    if (!g.a1to3) {
      b.skip(kNeedA1to3);
    } else {
      Rng rng = rng_for(2);
      for (std::size_t s = 0; s < cfg.samples; ++s) {
        Json p = base_payload(spec);
        p["x"] = vector_json(Eigen::RowVectorXd(dirichlet_flat(rng, k)));
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // P3
    Battery b("P3", "channel beliefs stay totally ordered along any trajectory", cfg);
    if (!g.a1to3) {
      b.skip(kNeedA1to3);
    } else if (spec.n_channels < 2) {
      b.skip("requires at least two channels");
    } else {
      Rng rng = rng_for(3);
      const int steps = depth + 2;
      for (std::size_t s = 0; s < cfg.samples; ++s) {
        Eigen::MatrixXd beliefs(spec.n_channels, k);
        for (int n = 0; n < spec.n_channels; ++n) beliefs.row(n) = spec.initial_pmfs[n].probs();
        Json path = Json::array();
        for (int t = 0; t < steps; ++t) {
          const int channel = pick(rng, 1, spec.n_channels);
          const int state = static_cast<int>(sample_index(rng, beliefs.row(channel - 1))) + 1;
          path.push_back({channel, state});
          beliefs = (beliefs * spec.p()).eval();
          beliefs.row(channel - 1) = spec.p().row(state - 1);
        }
        Json p = base_payload(spec);
        p["path"] = std::move(path);
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // P4
    Battery b("P4", "instantaneous reward ordering under the separation condition", cfg);
    if (!g.a1to4) {
      b.skip(kNeedA1to4);
    } else {
      Rng rng = rng_for(4);
      for (std::size_t s = 0; s < cfg.samples; ++s) {
        const Eigen::RowVectorXd y = dirichlet_flat(rng, k);
        Eigen::RowVectorXd x;
        std::string agree = "none";
        switch (s % 3) {
          case 0: x = dominating_join(y, dirichlet_flat(rng, k)); break;
          case 1: {  // same mass on states >= L; lower block rearranged upward
            agree = "high";
            x = y;
            const double mass = y.head(l - 1).sum();
            if (mass > 0.0) {
              const Eigen::RowVectorXd block = y.head(l - 1) / mass;
              x.head(l - 1) = mass * dominating_join(block, dirichlet_flat(rng, l - 1));
            }
            break;
          }
          default: {  // same mass on states < L; upper block rearranged upward
            agree = "low";
            x = y;
            const int hi = k - l + 1;
            const double mass = y.tail(hi).sum();
            if (mass > 0.0 && hi > 1) {
              const Eigen::RowVectorXd block = y.tail(hi) / mass;
              x.tail(hi) = mass * dominating_join(block, dirichlet_flat(rng, hi));
            }
            break;
          }
        }
        Eigen::RowVectorXd v(k);
        v(0) = uniform(rng, -1.0, 1.0);
        for (int i = 1; i < k; ++i) v(i) = v(i - 1) + uniform(rng, 0.0, 1.0);
        Json p = base_payload(spec);
        p["x"] = vector_json(x);
        p["y"] = vector_json(y);
        p["v"] = vector_json(v);
        p["agree"] = agree;
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // P5
    Battery b("P5", "sorted ordering policy value equals myopic policy value", cfg);
    if (!g.a1to3) {
      b.skip(kNeedA1to3);
    } else {
      Rng rng = rng_for(5);
      for (std::size_t s = 0; s < cfg.configurations; ++s) {
        const int channels = pick(rng, 1, max_ch);
        ProblemSpec sub;
        if (s % 2 == 0 && spec.n_channels >= channels) {
          sub = restrict_channels(spec, random_subset(rng, spec.n_channels, channels));
        } else {
          sub = with_initials(spec, chain_of_rows(rng, spec, channels));
        }
        Json p = base_payload(sub);
        p["horizon"] = pick(rng, 0, depth);
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  // P6, P7: gain from improving channel 1 is largest when it is sensed earliest.
  for (const bool use_swap : {false, true}) {
    Battery b(use_swap ? "P7" : "P6",
              use_swap ? "swap bound on the improvement difference"
                       : "rotation bound on the improvement difference",
              cfg);
    if (!g.a1to4) {
      b.skip(kNeedA1to4);
    } else {
      Rng rng = rng_for(use_swap ? 7 : 6);
      for (std::size_t s = 0; s < cfg.configurations; ++s) {
        const int channels = pick(rng, 2, max_ch);
        Eigen::MatrixXd beliefs = hull_beliefs(rng, spec, channels);
        const Eigen::RowVectorXd w = hull_weights(rng, k);
        const Eigen::RowVectorXd w_hat = dominating_join(w, hull_weights(rng, k));
        beliefs.row(0) = w * spec.p();
        const int n = pick(rng, 2, channels);
        const int m = pick(rng, 1, n - 1);
        Json p = base_payload(spec);
        p["beliefs"] = matrix_json(beliefs);
        p["pi_hat"] = vector_json(Eigen::RowVectorXd(w_hat * spec.p()));
        p["ordering"] = ordering_json(ordering_with_one_at(rng, channels, n));
        p["n"] = n;
        p["m"] = m;
        p["horizon"] = pick(rng, 0, depth);
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // P8
    Battery b("P8", "moving the better channel right does not decrease V", cfg);
    if (!g.a1to4) {
      b.skip(kNeedA1to4);
    } else {
      Rng rng = rng_for(8);
      for (std::size_t s = 0; s < cfg.configurations; ++s) {
        const int channels = pick(rng, 2, max_ch);
        std::vector<Eigen::RowVectorXd> weights;
        for (int c = 0; c < channels; ++c) weights.push_back(hull_weights(rng, k));
        const ChannelOrdering o(random_permutation(rng, channels));
        const int n = pick(rng, 2, channels);
        const int m = pick(rng, 1, n - 1);
        auto& better = weights[o.at(n) - 1];
        better = dominating_join(better, weights[o.at(m) - 1]);
        Eigen::MatrixXd beliefs(channels, k);
        for (int c = 0; c < channels; ++c) beliefs.row(c) = weights[c] * spec.p();
        Json p = base_payload(spec);
        p["beliefs"] = matrix_json(beliefs);
        p["ordering"] = ordering_json(o);
        p["n"] = n;
        p["m"] = m;
        p["horizon"] = pick(rng, 0, depth);
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // P9
    Battery b("P9", "lift bound when channel 1 improves while unobserved", cfg);
    if (!g.a1to4) {
      b.skip(kNeedA1to4);
    } else {
      Rng rng = rng_for(9);
      std::size_t fallbacks = 0;
      for (std::size_t s = 0; s < cfg.configurations; ++s) {
        const int channels = pick(rng, 2, max_ch);
        Eigen::MatrixXd beliefs = hull_beliefs(rng, spec, channels);
        Eigen::RowVectorXd first = spec.p().row(0);
        bool found = false;
        for (int attempt = 0; attempt < 100 && !found; ++attempt) {
          const Eigen::RowVectorXd cand = hull_weights(rng, k) * spec.p();
          if (dominates(cand * spec.p(), cand)) {
            first = cand;
            found = true;
          }
        }
        if (!found) ++fallbacks;
        beliefs.row(0) = first;
        const int n = pick(rng, 2, channels);
        const int m = pick(rng, 1, n - 1);
        Json p = base_payload(spec);
        p["beliefs"] = matrix_json(beliefs);
        p["ordering"] = ordering_json(ordering_with_one_at(rng, channels, n));
        p["n"] = n;
        p["m"] = m;
        p["horizon"] = pick(rng, 0, depth);
        b.run(std::move(p));
      }
      if (fallbacks > 0) {
        b.note(std::to_string(fallbacks) + " configuration(s) used pi^1 = P_1 after rejection");
      }
    }
    out.push_back(b.finish());
  }

  {  // L1
    Battery b("L1", "L_t is linear in the replaced PMF", cfg);
    Rng rng = rng_for(10);
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const int channels = pick(rng, 1, max_ch);
      Json p = base_payload(spec);
      p["beliefs"] = matrix_json(hull_beliefs(rng, spec, channels));
      p["ordering"] = ordering_json(ChannelOrdering(random_permutation(rng, channels)));
      p["n"] = 1;
      p["m"] = 0;
      p["i"] = pick(rng, 1, k);
      p["j"] = pick(rng, 1, k);
      p["alpha"] = uniform01(rng);
      p["horizon"] = pick(rng, 0, depth);
      b.run(std::move(p));
    }
    out.push_back(b.finish());
  }

  const int sub_n = std::min(spec.n_channels, std::max(1, cfg.theorem_channels));
  const double alt_discount = spec.discount < 1.0 ? spec.discount : cfg.fallback_discount;

  {  // T1
    Battery b("T1", "myopic value equals the optimal finite-horizon value", cfg);
    if (!g.a1to4) {
      b.skip(kNeedA1to4);
    } else {
      Rng rng = rng_for(11);
      for (std::size_t s = 0; s < cfg.theorem_configs; ++s) {
        const int size = s == 0 ? sub_n : pick(rng, 1, sub_n);
        Json p = base_payload(restrict_channels(spec, random_subset(rng, spec.n_channels, size)));
        p["horizon"] = s == 0 ? cfg.theorem_horizon : pick(rng, 0, cfg.theorem_horizon);
        p["node_budget"] = cfg.node_budget;
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // T2
    Battery b("T2", "myopic value equals the optimal infinite-horizon value", cfg);
    const ProblemSpec discounted = with_discount(spec, alt_discount);
    const bool ok = discounted.discount == spec.discount ? g.a1to4 : check_conditions(discounted).all_ok();
    if (spec.discount >= 1.0) b.note("evaluated at discount " + format_short(alt_discount));
    if (!ok) {
      b.skip(std::string(kNeedA1to4) + " at discount " + format_short(alt_discount));
    } else {
      Rng rng = rng_for(12);
      const int size = std::min(spec.n_channels, std::max(1, cfg.infinite_channels));
      for (std::size_t s = 0; s < cfg.infinite_configs; ++s) {
        Json p = base_payload(restrict_channels(discounted, random_subset(rng, spec.n_channels, size)));
        p["epsilon"] = cfg.epsilon;
        p["node_budget"] = cfg.node_budget;
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // T3
    Battery b("T3", "optimal value is nondecreasing in the horizon", cfg);
    if (spec.r().minCoeff() < 0.0) {
      b.skip("requires nonnegative rewards");
    } else {
      Rng rng = rng_for(13);
      for (std::size_t s = 0; s < cfg.theorem_configs; ++s) {
        const int size = pick(rng, 1, sub_n);
        Json p = base_payload(restrict_channels(spec, random_subset(rng, spec.n_channels, size)));
        p["horizon"] = pick(rng, 0, std::max(0, cfg.theorem_horizon - 1));
        p["node_budget"] = cfg.node_budget;
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  {  // T4
    Battery b("T4", "Gittins and myopic rules agree after time zero", cfg);
    const ProblemSpec discounted = with_discount(spec, alt_discount);
    if (l != k) {
      b.skip("requires L = K (coincidence is not established otherwise)");
    } else if (!(discounted.discount == spec.discount ? g.a1to4
                                                      : check_conditions(discounted).all_ok())) {
      b.skip(std::string(kNeedA1to4) + " at discount " + format_short(alt_discount));
    } else {
      if (spec.discount >= 1.0) b.note("evaluated at discount " + format_short(alt_discount));
      Rng rng = rng_for(14);
      for (std::size_t s = 0; s < cfg.theorem_configs; ++s) {
        const int size = s == 0 ? sub_n : pick(rng, 1, sub_n);
        Json p = base_payload(restrict_channels(discounted, random_subset(rng, spec.n_channels, size)));
        p["horizon"] = cfg.gittins_horizon;
        b.run(std::move(p));
      }
    }
    out.push_back(b.finish());
  }

  return out;
}

bool all_passed(const std::vector<PropertyReport>& reports) {
  return std::none_of(reports.begin(), reports.end(),
                      [](const PropertyReport& r) { return r.status == CheckStatus::Failed; });
}

Json to_json(const PropertyReport& r) {
  Json out;
  out["id"] = r.id;
  out["description"] = r.description;
  out["status"] = to_string(r.status);
  if (!r.reason.empty()) out["reason"] = r.reason;
  out["samples"] = r.samples;
  out["failure_count"] = r.failure_count;
  if (std::isfinite(r.worst_margin)) {
    out["worst_margin"] = r.worst_margin;
  } else {
    out["worst_margin"] = nullptr;
  }
  out["tolerance"] = r.tolerance;
  out["notes"] = r.notes;
  Json failures = Json::array();
  for (const auto& f : r.failures) failures.push_back({{"margin", f.margin}, {"payload", f.payload}});
  out["failures"] = failures;
  return out;
}

Json to_json(const std::vector<PropertyReport>& reports) {
  Json out = Json::array();
  for (const auto& r : reports) out.push_back(to_json(r));
  return out;
}

}  // namespace sense
