#include "sense/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sense/random.hpp"

namespace sense {

std::size_t NodeKeyHash::operator()(const NodeKey& k) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::int32_t v : k.code) h = splitmix64(h ^ static_cast<std::uint32_t>(v));
  return static_cast<std::size_t>(h);
}

NodeKey node_key(int t, const std::vector<Provenance>& provenance, const PolicyMemory& memory) {
  NodeKey key;
  const auto n = static_cast<std::int32_t>(provenance.size());
  key.code.reserve(1 + 2 * provenance.size() + memory.size());
  key.code.push_back(t);
  for (const auto& p : provenance) {
    key.code.push_back(p.kind == Provenance::Kind::Initial ? p.index : n + p.index);
    key.code.push_back(p.steps);
  }
  key.code.insert(key.code.end(), memory.begin(), memory.end());
  return key;
}

namespace {

std::vector<Provenance> root_provenance(const ProblemSpec& spec) {
  std::vector<Provenance> prov;
  for (int n = 1; n <= spec.n_channels; ++n) prov.push_back(Provenance::initial(n));
  return prov;
}

class OptimalSolver {
 public:
  OptimalSolver(const ProblemSpec& spec, int horizon, const DpOptions& options)
      : spec_(spec), table_(spec, horizon), horizon_(horizon), options_(options) {
    if (options.record_policy) actions_ = std::make_shared<ActionMap>();
  }

  double value(int t, const std::vector<Provenance>& prov) {
    NodeKey key = node_key(t, prov);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = -std::numeric_limits<double>::infinity();
    int best_channel = 1;
    for (int n = 1; n <= spec_.n_channels; ++n) {
      double v = table_.reward(prov[n - 1]);
      if (t < horizon_) {
        const Pmf& pmf = table_.pmf(prov[n - 1]);
        double continuation = 0.0;
        for (int i = 1; i <= spec_.n_states; ++i) {
          const double p = pmf.at(i);
          if (p <= 0.0) continue;
          continuation += p * value(t + 1, advance(prov, n, i));
        }
        v += spec_.discount * continuation;
      }
      if (v > best) {
        best = v;
        best_channel = n;
      }
    }
    if (memo_.size() >= options_.node_budget) {
      throw BudgetExceeded("belief-tree node budget of " + std::to_string(options_.node_budget) +
                           " exceeded");
    }
    if (actions_) actions_->emplace(key, best_channel);
    memo_.emplace(std::move(key), best);
    return best;
  }

  ValueResult run() {
    ValueResult out;
    out.value = value(0, root_provenance(spec_));
    out.policy_trace = actions_;
    out.stats = {memo_.size(), horizon_};
    return out;
  }

 private:
  const ProblemSpec& spec_;
  BeliefTable table_;
  int horizon_;
  DpOptions options_;
  std::unordered_map<NodeKey, double, NodeKeyHash> memo_;
  std::shared_ptr<ActionMap> actions_;
};

class PolicySolver {
 public:
  PolicySolver(const ProblemSpec& spec, int horizon, Policy& policy, const DpOptions& options)
      : spec_(spec), table_(spec, horizon), horizon_(horizon), policy_(policy), options_(options) {
    if (options.record_policy) actions_ = std::make_shared<ActionMap>();
  }

  double value(int t, const std::vector<Provenance>& prov, const PolicyMemory& memory) {
    NodeKey key = node_key(t, prov, memory);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    double v = 0.0;
    if (policy_.randomized()) {
      for (int n = 1; n <= spec_.n_channels; ++n) v += branch(t, prov, memory, n);
      v /= spec_.n_channels;
    } else {
      const BeliefState belief = table_.materialize(prov);
      const int n = policy_.decide(belief, t, memory).channel;
      if (n < 1 || n > spec_.n_channels) throw InvalidArgument("policy chose an unknown channel");
      if (actions_) actions_->emplace(key, n);
      v = branch(t, prov, memory, n);
    }
    if (memo_.size() >= options_.node_budget) {
      throw BudgetExceeded("belief-tree node budget of " + std::to_string(options_.node_budget) +
                           " exceeded");
    }
    memo_.emplace(std::move(key), v);
    return v;
  }

  ValueResult run() {
    const auto prov = root_provenance(spec_);
    const PolicyMemory memory = policy_.initial_memory(table_.materialize(prov));
    ValueResult out;
    out.value = value(0, prov, memory);
    out.policy_trace = actions_;
    out.stats = {memo_.size(), horizon_};
    return out;
  }

 private:
  double branch(int t, const std::vector<Provenance>& prov, const PolicyMemory& memory, int n) {
    double v = table_.reward(prov[n - 1]);
    if (t == horizon_) return v;
    const Pmf& pmf = table_.pmf(prov[n - 1]);
    double continuation = 0.0;
    for (int i = 1; i <= spec_.n_states; ++i) {
      const double p = pmf.at(i);
      if (p <= 0.0) continue;
      continuation += p * value(t + 1, advance(prov, n, i), policy_.update(memory, n, i));
    }
    return v + spec_.discount * continuation;
  }

  const ProblemSpec& spec_;
  BeliefTable table_;
  int horizon_;
  Policy& policy_;
  DpOptions options_;
  std::unordered_map<NodeKey, double, NodeKeyHash> memo_;
  std::shared_ptr<ActionMap> actions_;
};

}  // namespace

ValueResult optimal_value_dp(const ProblemSpec& spec, int horizon, DpOptions options) {
  if (horizon < 0) throw InvalidArgument("horizon must be non-negative");
  spec.validate();
  return OptimalSolver(spec, horizon, options).run();
}

ValueResult policy_value_dp(const ProblemSpec& spec, int horizon, Policy& policy,
                            DpOptions options) {
  if (horizon < 0) throw InvalidArgument("horizon must be non-negative");
  spec.validate();
  return PolicySolver(spec, horizon, policy, options).run();
}

PolicyDecision TabulatedPolicy::decide(const BeliefState& belief, int t, const PolicyMemory&) {
  const auto it = actions_->find(node_key(t, belief.provenance()));
  if (it == actions_->end()) throw InvalidArgument("tabulated policy has no entry for this node");
  PolicyDecision d;
  d.channel = it->second;
  d.rationale = Rationale::Tabulated;
  return d;
}

BeliefMatrix belief_matrix(const BeliefState& belief) {
  const int n = belief.channels();
  BeliefMatrix m(n, n > 0 ? belief.pmf(1).size() : 0);
  for (int c = 1; c <= n; ++c) m.row(c - 1) = belief.pmf(c).probs();
  return m;
}

namespace {

double ordering_value_rec(const std::vector<int>& order, const BeliefMatrix& beliefs,
                          const Eigen::MatrixXd& p, const Eigen::VectorXd& r, int threshold,
                          double beta, int t, int horizon) {
  const int c = order.back() - 1;
  const Eigen::RowVectorXd sensed = beliefs.row(c);
  double v = sensed.dot(r);
  if (t >= horizon) return v;
  BeliefMatrix next = beliefs * p;
  std::vector<int> shifted = order;
  std::rotate(shifted.rbegin(), shifted.rbegin() + 1, shifted.rend());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double w = sensed(i);
    if (w == 0.0) continue;
    next.row(c) = p.row(i);
    const bool below = static_cast<int>(i) + 1 < threshold;
    v += beta * w *
         ordering_value_rec(below ? shifted : order, next, p, r, threshold, beta, t + 1, horizon);
  }
  return v;
}

}  // namespace

double ordering_value(const ChannelOrdering& ordering, const BeliefMatrix& beliefs,
                      const ProblemSpec& spec, int t, int horizon) {
  if (t > horizon) throw InvalidArgument("ordering_value: t must not exceed T");
  if (beliefs.rows() != ordering.size() || beliefs.cols() != spec.n_states) {
    throw DimensionMismatch("ordering_value: belief matrix shape mismatch");
  }
  return ordering_value_rec(ordering.order(), beliefs, spec.p(), spec.r(), spec.threshold,
                            spec.discount, t, horizon);
}

double ordering_value_diff(const ChannelOrdering& ordering, const Eigen::RowVectorXd& pi_hat,
                           const BeliefMatrix& beliefs, const ProblemSpec& spec, int t,
                           int horizon) {
  BeliefMatrix replaced = beliefs;
  replaced.row(0) = pi_hat;
  return ordering_value(ordering, replaced, spec, t, horizon) -
         ordering_value(ordering, beliefs, spec, t, horizon);
}

int truncation_horizon(const ProblemSpec& spec, double epsilon) {
  const double beta = spec.discount;
  if (!(beta > 0.0 && beta < 1.0)) {
    throw DegenerateComputation("infinite-horizon value requires 0 < discount < 1");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const double rmax = spec.r().cwiseAbs().maxCoeff();
  if (rmax == 0.0) return 0;
  int horizon = 0;
  double tail = beta * rmax / (1.0 - beta);
  while (tail >= epsilon) {
    tail *= beta;
    ++horizon;
  }
  return horizon;
}

InfiniteHorizonValue infinite_horizon_value(const ProblemSpec& spec, Policy* policy,
                                            double epsilon, DpOptions options) {
  InfiniteHorizonValue out;
  out.horizon = truncation_horizon(spec, epsilon);
  out.truncation_bound = std::pow(spec.discount, out.horizon + 1) *
                         spec.r().cwiseAbs().maxCoeff() / (1.0 - spec.discount);
  const ValueResult v = policy ? policy_value_dp(spec, out.horizon, *policy, options)
                               : optimal_value_dp(spec, out.horizon, options);
  out.value = v.value;
  out.stats = v.stats;
  return out;
}

}  // namespace sense
