#include <doctest.h>

#include <cmath>
#include <functional>

#include "sense/conditions.hpp"
#include "sense/evaluation.hpp"
#include "sense/random.hpp"
#include "sense/random_spec.hpp"
#include "support.hpp"

using namespace sense;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;

namespace {

// Plain belief-tree evaluation with explicit Bayesian updates; no provenance,
// no memoization. `choose` sees time, the history index and the beliefs.
using Chooser = std::function<int(int t, std::size_t history, const MatrixXd& beliefs)>;

double brute_value(const ProblemSpec& spec, const MatrixXd& beliefs, int t, int horizon,
                   std::size_t history, const Chooser& choose) {
  const int n = choose(t, history, beliefs);
  const RowVectorXd sensed = beliefs.row(n - 1);
  double v = sensed.dot(spec.r());
  if (t == horizon) return v;
  const int k = spec.n_states;
  for (int i = 0; i < k; ++i) {
    if (sensed(i) <= 0.0) continue;
    MatrixXd next = beliefs * spec.p();
    next.row(n - 1) = spec.p().row(i);
    const std::size_t child = history * static_cast<std::size_t>(spec.n_channels * k) +
                              static_cast<std::size_t>((n - 1) * k + i) + 1;
    v += spec.discount * sensed(i) * brute_value(spec, next, t + 1, horizon, child, choose);
  }
  return v;
}

// Best value over every deterministic history-dependent policy, by a
// maximization at each history.
double brute_optimal(const ProblemSpec& spec, const MatrixXd& beliefs, int t, int horizon) {
  double best = -1e300;
  for (int n = 1; n <= spec.n_channels; ++n) {
    const RowVectorXd sensed = beliefs.row(n - 1);
    double v = sensed.dot(spec.r());
    if (t < horizon) {
      for (int i = 0; i < spec.n_states; ++i) {
        if (sensed(i) <= 0.0) continue;
        MatrixXd next = beliefs * spec.p();
        next.row(n - 1) = spec.p().row(i);
        v += spec.discount * sensed(i) * brute_optimal(spec, next, t + 1, horizon);
      }
    }
    best = std::max(best, v);
  }
  return best;
}

MatrixXd initial_matrix(const ProblemSpec& spec) {
  return belief_matrix(initial_belief(spec));
}

ProblemSpec random_unconstrained(std::uint64_t seed, int k, int n, double beta) {
  RandomSpecRequest req;
  req.n_states = k;
  req.n_channels = n;
  req.threshold = k;
  req.discount = beta;
  req.seed = seed;
  return *random_spec(req).spec;
}

ProblemSpec random_good(std::uint64_t seed, int k, int n, int l, double beta) {
  RandomSpecRequest req;
  req.n_states = k;
  req.n_channels = n;
  req.threshold = l;
  req.discount = beta;
  req.seed = seed;
  req.constraint = SpecConstraint::TryA1toA4;
  return *random_spec(req).spec;
}

}  // namespace

TEST_CASE("horizon zero is the best immediate reward") {
  const ProblemSpec spec = test::example_spec();
  double best = -1e300;
  for (const Pmf& pi : spec.initial_pmfs) best = std::max(best, pi.expect(spec.r()));
  CHECK(optimal_value_dp(spec, 0).value == doctest::Approx(best).epsilon(1e-15));
}

TEST_CASE("a single channel leaves nothing to choose") {
  const ProblemSpec spec = load_instance(test::fixture("one_channel.json"));
  FixedPolicy fixed(1);
  for (int t = 0; t <= 5; ++t) {
    CHECK(optimal_value_dp(spec, t).value == policy_value_dp(spec, t, fixed).value);
  }
}

TEST_CASE("exhaustive policy enumeration bounds the exact optimum") {
  // K = 2, N = 2, T = 2: 21 decision histories, 2^21 deterministic policies.
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const ProblemSpec spec = random_unconstrained(seed, 2, 2, seed == 0 ? 1.0 : 0.8);
    const MatrixXd b0 = initial_matrix(spec);
    const int horizon = 2;
    // With base N*K = 4 the history indices are 0 at the root, 1..4 at t = 1
    // and 5..20 at t = 2.
    double best = -1e300;
    for (std::uint32_t mask = 0; mask < (1u << 21); ++mask) {
      const Chooser pick = [&](int, std::size_t h, const MatrixXd&) {
        return ((mask >> h) & 1u) ? 2 : 1;
      };
      best = std::max(best, brute_value(spec, b0, 0, horizon, 0, pick));
    }
    CHECK(std::abs(optimal_value_dp(spec, horizon).value - best) <= 1e-12);
  }
}

TEST_CASE("exact optimum agrees with plain expectimax") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 2 + static_cast<int>(seed % 3);
    const int n = 2 + static_cast<int>(seed % 2);
    const ProblemSpec spec = random_unconstrained(100 + seed, k, n, 0.7);
    for (int horizon = 0; horizon <= 3; ++horizon) {
      const double oracle = brute_optimal(spec, initial_matrix(spec), 0, horizon);
      CHECK(std::abs(optimal_value_dp(spec, horizon).value - oracle) <= 1e-10);
    }
  }
}

TEST_CASE("policy evaluation agrees with plain tree evaluation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ProblemSpec spec = random_unconstrained(300 + seed, 3, 3, 0.9);
    const MatrixXd b0 = initial_matrix(spec);
    RoundRobinPolicy rr(2);
    const Chooser rr_pick = [](int t, std::size_t, const MatrixXd&) { return (1 + t) % 3 + 1; };
    CHECK(std::abs(policy_value_dp(spec, 3, rr).value - brute_value(spec, b0, 0, 3, 0, rr_pick)) <=
          1e-12);
    MyopicPolicy greedy(true, spec.reward);
    const Chooser greedy_pick = [&](int, std::size_t, const MatrixXd& b) {
      std::vector<Provenance> prov;
      std::vector<Pmf> pmfs;
      for (int c = 1; c <= 3; ++c) {
        prov.push_back(Provenance::initial(c));
        pmfs.emplace_back(RowVectorXd(b.row(c - 1)));
      }
      return myopic_action(BeliefState(prov, pmfs), &spec.reward).channel;
    };
    CHECK(std::abs(policy_value_dp(spec, 3, greedy).value -
                   brute_value(spec, b0, 0, 3, 0, greedy_pick)) <= 1e-10);
  }
}

TEST_CASE("randomized policies are averaged over channels") {
  const ProblemSpec spec = load_instance(test::fixture("two_state.json"));
  RandomPolicy random(1);
  // With T = 0 the value is the mean immediate reward.
  double mean = 0.0;
  for (const Pmf& pi : spec.initial_pmfs) mean += pi.expect(spec.r());
  mean /= spec.n_channels;
  CHECK(policy_value_dp(spec, 0, random).value == doctest::Approx(mean).epsilon(1e-14));
  CHECK(policy_value_dp(spec, 3, random).value <= optimal_value_dp(spec, 3).value + 1e-12);
}

TEST_CASE("ordering value") {
  const ProblemSpec spec = load_instance(test::fixture("five_state_3ch.json"));
  const BeliefState b0 = initial_belief(spec);
  const MatrixXd beliefs = belief_matrix(b0);
  SUBCASE("at t = T only the right-most channel counts") {
    const ChannelOrdering o({2, 3, 1});
    CHECK(ordering_value(o, beliefs, spec, 4, 4) == doctest::Approx(spec.initial_pmfs[0].expect(spec.r())));
  }
  SUBCASE("sorted ordering reproduces the myopic policy") {
    MyopicPolicy myopic;
    const double v = policy_value_dp(spec, 3, myopic).value;
    const double o = ordering_value(dominance_ordering(b0), beliefs, spec, 0, 3);
    CHECK(std::abs(v - o) <= 1e-12);
    CHECK(std::abs(v - optimal_value_dp(spec, 3).value) <= 1e-9);
  }
  SUBCASE("ordering policy matches the recursion started at any ordering") {
    const ChannelOrdering o({1, 3, 2});
    OrderingPolicy p(spec.threshold, o);
    CHECK(std::abs(policy_value_dp(spec, 3, p).value - ordering_value(o, beliefs, spec, 0, 3)) <=
          1e-12);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(ordering_value(ChannelOrdering({1, 2, 3}), beliefs, spec, 5, 4), InvalidArgument);
    CHECK_THROWS_AS(ordering_value(ChannelOrdering({1, 2}), beliefs, spec, 0, 4), DimensionMismatch);
  }
}

TEST_CASE("myopic matches the optimum on generated instances") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const ProblemSpec spec = random_good(seed, 3, 3, 2 + static_cast<int>(seed % 2), 1.0);
    MyopicPolicy myopic;
    for (int horizon : {1, 3}) {
      CHECK(std::abs(policy_value_dp(spec, horizon, myopic).value -
                     optimal_value_dp(spec, horizon).value) <= 1e-9);
    }
  }
}

TEST_CASE("truncated infinite horizon") {
  SUBCASE("truncation horizon") {
    const ProblemSpec spec = with_discount(test::example_spec(), 0.9);
    const int t = truncation_horizon(spec, 1e-8);
    CHECK(std::pow(0.9, t + 1) * 4.0 / 0.1 < 1e-8);
    CHECK(std::pow(0.9, t) * 4.0 / 0.1 >= 1e-8);
    CHECK_THROWS_AS(truncation_horizon(test::example_spec(), 1e-8), DegenerateComputation);
  }
  SUBCASE("zero rewards give zero") {
    Eigen::MatrixXd p(2, 2);
    p << 0.6, 0.4, 0.3, 0.7;
    RowVectorXd pi(2);
    pi << 0.5, 0.5;
    const ProblemSpec spec = make_spec(p, Eigen::Vector2d(0, 0), {pi, pi}, 2, 0.9);
    const InfiniteHorizonValue v = infinite_horizon_value(spec, nullptr);
    CHECK(v.value == 0.0);
    CHECK(v.horizon == 0);
  }
  SUBCASE("an absorbing state pays R_i / (1 - beta)") {
    const ProblemSpec spec =
        make_spec(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(0, 1, 2),
                  {Pmf::basis(3, 2).probs()}, 3, 0.9);
    const InfiniteHorizonValue v = infinite_horizon_value(spec, nullptr, 1e-8);
    CHECK(std::abs(v.value - 1.0 / 0.1) <= 1e-8);
    CHECK(v.truncation_bound < 1e-8);
  }
  SUBCASE("myopic within tolerance of optimal on a two-state instance") {
    const ProblemSpec spec = load_instance(test::fixture("two_state.json"));
    MyopicPolicy myopic;
    const ProblemSpec two = restrict_channels(spec, {1, 3});
    const double gap = infinite_horizon_value(two, nullptr).value -
                       infinite_horizon_value(two, &myopic).value;
    CHECK(std::abs(gap) <= 2e-8);
  }
}

TEST_CASE("simulation") {
  SUBCASE("deterministic channels give a constant total") {
    const ProblemSpec spec = load_instance(test::fixture("identity.json"));
    MyopicPolicy myopic;
    const SimulationReport r = simulate(spec, myopic, 6, 200, 1, 2);
    const double exact = 2.0 * (1.0 - std::pow(0.9, 7)) / 0.1;
    CHECK(r.standard_error <= 1e-12);
    CHECK(std::abs(r.mean - exact) <= 1e-12);
    CHECK(std::abs(policy_value_dp(spec, 6, myopic).value - exact) <= 1e-12);
  }
  SUBCASE("results do not depend on the thread count") {
    const ProblemSpec spec = load_instance(test::fixture("two_state.json"));
    RandomPolicy random(5);
    const SimulationReport a = simulate(spec, random, 8, 500, 42, 1);
    const SimulationReport b = simulate(spec, random, 8, 500, 42, 4);
    CHECK(a.totals == b.totals);
    CHECK(a.mean == b.mean);
    const SimulationReport c = simulate(spec, random, 8, 500, 43, 1);
    CHECK(a.totals != c.totals);
  }
  SUBCASE("mean is close to the exact value") {
    const ProblemSpec spec = load_instance(test::fixture("two_state.json"));
    MyopicPolicy myopic;
    const SimulationReport r = simulate(spec, myopic, 5, 20000, 9);
    const double exact = policy_value_dp(spec, 5, myopic).value;
    CHECK(std::abs(r.mean - exact) <= 4.0 * r.standard_error);
  }
  SUBCASE("argument checks") {
    const ProblemSpec spec = load_instance(test::fixture("two_state.json"));
    MyopicPolicy myopic;
    CHECK_THROWS_AS(simulate(spec, myopic, 3, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(simulate(spec, myopic, -1, 10, 1), InvalidArgument);
  }
}

TEST_CASE("node budget") {
  DpOptions tight;
  tight.node_budget = 10;
  CHECK_THROWS_AS(optimal_value_dp(test::example_spec(), 3, tight), BudgetExceeded);
}
