#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "sense/policies.hpp"
#include "sense/problem.hpp"

namespace sense {

/// Memo key of a belief-tree node: time, per-channel provenance, and the
/// policy memory (if any).
struct NodeKey {
  std::vector<std::int32_t> code;
  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept;
};

NodeKey node_key(int t, const std::vector<Provenance>& provenance, const PolicyMemory& memory = {});

using ActionMap = std::unordered_map<NodeKey, int, NodeKeyHash>;

struct DpStats {
  std::size_t nodes = 0;
  int depth = 0;
};

struct ValueResult {
  double value = 0.0;
  std::shared_ptr<const ActionMap> policy_trace;
  DpStats stats;
};

struct DpOptions {
  std::size_t node_budget = 10'000'000;
  bool record_policy = false;
};

/// Exact optimal expected discounted reward over t = 0..T by a belief-tree
/// recursion memoized on provenance.
ValueResult optimal_value_dp(const ProblemSpec& spec, int horizon, DpOptions options = {});

/// Exact expected discounted reward of `policy` over t = 0..T.
ValueResult policy_value_dp(const ProblemSpec& spec, int horizon, Policy& policy,
                            DpOptions options = {});

/// Plays the actions recorded by optimal_value_dp(record_policy = true).
class TabulatedPolicy final : public Policy {
 public:
  explicit TabulatedPolicy(std::shared_ptr<const ActionMap> actions) : actions_(std::move(actions)) {}
  std::string name() const override { return "tabulated"; }
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory&) override;
  std::unique_ptr<Policy> fork(std::uint64_t) const override {
    return std::make_unique<TabulatedPolicy>(*this);
  }

 private:
  std::shared_ptr<const ActionMap> actions_;
};

/// Channel beliefs as rows of an N x K matrix (row n-1 is channel n).
using BeliefMatrix = Eigen::MatrixXd;

BeliefMatrix belief_matrix(const BeliefState& belief);

/// Expected reward from time t through T of the ordering-based policy
/// started from ordering O with the given beliefs:
///   V_T = pi^{O(N)} R
///   V_t = pi^{O(N)} R + beta sum_{i<L} pi^{O(N)}(i) V_{t+1}(S O, .)
///                     + beta sum_{i>=L} pi^{O(N)}(i) V_{t+1}(O, .)
double ordering_value(const ChannelOrdering& ordering, const BeliefMatrix& beliefs,
                      const ProblemSpec& spec, int t, int horizon);

/// V_t(O, pi_hat, pi^2, ...) - V_t(O, pi^1, pi^2, ...): channel 1's belief
/// replaced by pi_hat.
double ordering_value_diff(const ChannelOrdering& ordering, const Eigen::RowVectorXd& pi_hat,
                           const BeliefMatrix& beliefs, const ProblemSpec& spec, int t,
                           int horizon);

struct InfiniteHorizonValue {
  double value = 0.0;
  int horizon = 0;          // truncation horizon T*
  double truncation_bound;  // beta^{T*+1} R_max / (1 - beta)
  DpStats stats;
};

/// Smallest T with beta^{T+1} max|R| / (1 - beta) < epsilon.
int truncation_horizon(const ProblemSpec& spec, double epsilon);

/// Truncated infinite-horizon value; nullptr policy means the optimal value.
InfiniteHorizonValue infinite_horizon_value(const ProblemSpec& spec, Policy* policy,
                                            double epsilon = 1e-8, DpOptions options = {});

struct SimulationReport {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::string policy;
  std::vector<double> totals;  // per-replication discounted reward
};

/// Monte Carlo rollouts of the hidden channel chains. Replication r uses a
/// generator seeded from (seed, r), so results do not depend on threading.
SimulationReport simulate(const ProblemSpec& spec, const Policy& policy, int horizon,
                          std::size_t replications, std::uint64_t seed, unsigned threads = 0);

}  // namespace sense
