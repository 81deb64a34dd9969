#include <doctest.h>

#include "sense/evaluation.hpp"
#include "sense/policies.hpp"
#include "sense/random.hpp"
#include "sense/random_spec.hpp"
#include "support.hpp"

using namespace sense;

namespace {
ChannelOrdering ord(std::vector<int> v) { return ChannelOrdering(std::move(v)); }

BeliefState beliefs(std::vector<Eigen::RowVectorXd> rows) {
  std::vector<Provenance> prov;
  std::vector<Pmf> pmfs;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    prov.push_back(Provenance::initial(static_cast<int>(n) + 1));
    pmfs.emplace_back(rows[n]);
  }
  return BeliefState(std::move(prov), std::move(pmfs));
}

Eigen::RowVectorXd row3(double a, double b, double c) {
  Eigen::RowVectorXd r(3);
  r << a, b, c;
  return r;
}
}  // namespace

TEST_CASE("ordering operators on a concrete permutation") {
  const ChannelOrdering o = ord({1, 2, 3, 4});
  CHECK(shift(o) == ord({4, 1, 2, 3}));
  CHECK(shift_ccw(o, 0) == o);
  CHECK(shift_ccw(o, 1) == ord({2, 3, 4, 1}));
  CHECK(shift_ccw(o, 3) == ord({4, 1, 2, 3}));
  CHECK(swap(o, 4, 2) == ord({1, 4, 3, 2}));
  CHECK(lift(o, 4, 2) == ord({1, 4, 2, 3}));
  CHECK(lift(o, 2, 1) == swap(o, 2, 1));
  CHECK(o.rightmost() == 4);
  CHECK(o.position_of(3) == 3);
}

TEST_CASE("ordering operator argument checks") {
  const ChannelOrdering o = ord({2, 1, 3});
  CHECK_THROWS_AS(swap(o, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(lift(o, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(shift_ccw(o, 3), InvalidArgument);
  CHECK_THROWS_AS(ord({1, 1, 2}), InvalidArgument);
  CHECK_THROWS_AS(ord({}), InvalidArgument);
}

TEST_CASE("ordering operator identities on random permutations") {
  Rng rng(9);
  for (int s = 0; s < 500; ++s) {
    const int n_ch = uniform_int(rng, 2, 7);
    const ChannelOrdering o(random_permutation(rng, n_ch));
    CHECK(shift(o) == lift(o, n_ch, 1));
    CHECK(shift_ccw(shift(o), n_ch - 1) == shift(shift(o)));  // S^{-(N-1)} = S
    ChannelOrdering back = o;
    for (int k = 0; k < n_ch; ++k) back = shift(back);
    CHECK(back == o);
    const int n = uniform_int(rng, 2, n_ch);
    const int m = uniform_int(rng, 1, n - 1);
    // A_nm is a cascade of adjacent exchanges from n down to m.
    ChannelOrdering cascade = o;
    for (int j = n; j > m; --j) cascade = swap(cascade, j, j - 1);
    CHECK(lift(o, n, m) == cascade);
    if (n < n_ch) CHECK(shift(swap(o, n, m)) == swap(shift(o), n + 1, m + 1));
    CHECK(swap(swap(o, n, m), n, m) == o);
  }
}

TEST_CASE("ordering policy step") {
  const ChannelOrdering o = ord({3, 1, 2});
  CHECK(ordering_policy_step(o, 4, 4) == o);
  CHECK(ordering_policy_step(o, 5, 4) == o);
  CHECK(ordering_policy_step(o, 3, 4) == shift(o));
}

TEST_CASE("myopic rule") {
  SUBCASE("the example's initial belief picks the best row") {
    const ProblemSpec spec = test::example_spec();
    const PolicyDecision d = myopic_action(initial_belief(spec));
    CHECK(d.channel == 6);
    CHECK(d.rationale == Rationale::MyopicDominance);
  }
  SUBCASE("ties go to the lowest channel") {
    const BeliefState b = beliefs({row3(0.2, 0.3, 0.5), row3(0.2, 0.3, 0.5), row3(0.5, 0.3, 0.2)});
    CHECK(myopic_action(b).channel == 1);
  }
  SUBCASE("incomparable beliefs") {
    const BeliefState b = beliefs({row3(0.5, 0.0, 0.5), row3(0.4, 0.3, 0.3)});
    CHECK_THROWS_AS(myopic_action(b), IncomparableBeliefs);
    const RewardVector r(Eigen::Vector3d(0, 1, 2));
    const PolicyDecision d = myopic_action(b, &r);
    CHECK(d.channel == 1);
    CHECK(d.rationale == Rationale::MyopicFallback);
    CHECK_FALSE(d.warnings.empty());
    REQUIRE(d.scores.size() == 2);
    CHECK(d.scores[0] == doctest::Approx(1.0));
    CHECK(d.scores[1] == doctest::Approx(0.9));
  }
}

TEST_CASE("dominance ordering") {
  const BeliefState b = beliefs({row3(0.2, 0.3, 0.5), row3(0.6, 0.3, 0.1), row3(0.2, 0.3, 0.5)});
  // Channel 2 is worst; the tied pair keeps channel 1 right-most.
  CHECK(dominance_ordering(b) == ord({2, 3, 1}));
  CHECK(myopic_action(b).channel == dominance_ordering(b).rightmost());
  const BeliefState bad = beliefs({row3(0.5, 0.0, 0.5), row3(0.4, 0.3, 0.3)});
  CHECK_THROWS_AS(dominance_ordering(bad), IncomparableBeliefs);
}

TEST_CASE("closed-form index") {
  const ProblemSpec spec = with_discount(test::example_spec(), 0.9);
  SUBCASE("at P_K the index equals the one-step reward") {
    CHECK(gittins_index(spec.transition.row(5), spec) ==
          doctest::Approx(spec.row_reward(5)).epsilon(1e-12));
  }
  SUBCASE("monotone along the band") {
    const Eigen::RowVectorXd lo = spec.p().row(3);
    const Eigen::RowVectorXd hi = spec.p().row(4);
    double prev = -1e300;
    for (int s = 0; s <= 10; ++s) {
      const Pmf x((1.0 - s / 10.0) * lo + (s / 10.0) * hi);
      CHECK(gittins_in_band(x, spec));
      const double v = gittins_index(x, spec);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
  SUBCASE("requires discount below one") {
    CHECK_THROWS_AS(gittins_index(spec.transition.row(5), test::example_spec()), DegenerateComputation);
    CHECK_THROWS_AS(GittinsPolicy(test::example_spec()), DegenerateComputation);
  }
  SUBCASE("time zero is flagged") {
    const PolicyDecision d = gittins_action(initial_belief(spec), spec, 0);
    CHECK(d.time_zero);
    CHECK(d.channel == 6);
  }
}

TEST_CASE("policy parsing") {
  const ProblemSpec spec = load_instance(test::fixture("five_state_3ch.json"));
  CHECK(make_policy("myopic", spec)->name() == "myopic");
  CHECK(make_policy("fixed:2", spec)->name() == "fixed:2");
  CHECK(make_policy("ordering:3,1,2", spec)->name() == "ordering:3,1,2");
  CHECK(make_policy("ordering:sorted", spec)->name() == "ordering:sorted");
  CHECK(make_policy("random", spec, 4)->randomized());
  CHECK_THROWS_AS(make_policy("fixed:x", spec), InvalidArgument);
  CHECK_THROWS_AS(make_policy("fixed:4", spec), InvalidArgument);
  CHECK_THROWS_AS(make_policy("ordering:1,2", spec), InvalidArgument);
  CHECK_THROWS_AS(make_policy("ordering:1,a,2", spec), InvalidArgument);
  CHECK_THROWS_AS(make_policy("greedy", spec), InvalidArgument);
  CHECK_THROWS_AS(make_policy("gittins", spec), DegenerateComputation);
}

TEST_CASE("round robin and fixed baselines") {
  const ProblemSpec spec = load_instance(test::fixture("five_state_3ch.json"));
  const BeliefState b = initial_belief(spec);
  RoundRobinPolicy rr(2);
  CHECK(rr.decide(b, 0, {}).channel == 2);
  CHECK(rr.decide(b, 1, {}).channel == 3);
  CHECK(rr.decide(b, 2, {}).channel == 1);
  FixedPolicy bad(5);
  CHECK_THROWS_AS(bad.decide(b, 0, {}), InvalidArgument);
}
