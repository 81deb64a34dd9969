#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sense/problem.hpp"

namespace sense {

/// Permutation of channels {1..N}; position 1 is left-most, N right-most.
/// The right-most channel is the one an ordering-based policy senses next.
class ChannelOrdering {
 public:
  ChannelOrdering() = default;
  explicit ChannelOrdering(std::vector<int> order);
  static ChannelOrdering identity(int n);

  int size() const { return static_cast<int>(order_.size()); }
  /// Channel at position pos (1-based).
  int at(int pos) const { return order_.at(pos - 1); }
  /// Position (1-based) holding channel c.
  int position_of(int channel) const;
  int rightmost() const { return order_.back(); }
  const std::vector<int>& order() const { return order_; }

  friend bool operator==(const ChannelOrdering&, const ChannelOrdering&) = default;

 private:
  std::vector<int> order_;
};

/// S O = (O(N), O(1), ..., O(N-1)).
ChannelOrdering shift(const ChannelOrdering& o);
/// S^{-m} O = (O(m+1), ..., O(N), O(1), ..., O(m)), 0 <= m < N.
ChannelOrdering shift_ccw(const ChannelOrdering& o, int m);
/// W_nm: exchange positions n and m, 1 <= m < n <= N.
ChannelOrdering swap(const ChannelOrdering& o, int n, int m);
/// A_nm: the channel at position n moves to position m; positions m..n-1 move
/// one step right. 1 <= m < n <= N.
ChannelOrdering lift(const ChannelOrdering& o, int n, int m);
/// Ordering update after observing `state`: unchanged if state >= L, else S O.
ChannelOrdering ordering_policy_step(const ChannelOrdering& o, int observed_state, int threshold);

/// Channels sorted so that beliefs increase stochastically left to right;
/// among equal beliefs the lowest channel index ends up right-most.
/// Throws IncomparableBeliefs when no such chain exists.
ChannelOrdering dominance_ordering(const BeliefState& belief);

enum class Rationale { MyopicDominance, MyopicFallback, OrderingRightmost, GittinsArgmax, Fixed, RoundRobin, Random, Tabulated };

std::string to_string(Rationale r);

struct PolicyDecision {
  int channel = 1;
  Rationale rationale = Rationale::Fixed;
  std::vector<double> scores;
  std::vector<std::string> warnings;
  bool time_zero = false;
};

/// Myopic rule: the channel whose PMF dominates all others; ties broken
/// toward the lowest channel index. With allow_fallback, an incomparable
/// belief falls back to the argmax of expected reward (flagged); otherwise it
/// throws IncomparableBeliefs.
PolicyDecision myopic_action(const BeliefState& belief, const RewardVector* fallback_rewards = nullptr);

/// Closed-form index for the single-arm problem with L = K (beta < 1):
///   nu(pi) = (pi R + beta pi(K) P_K R / (1 - beta p_KK)) / (1 + beta pi(K) / (1 - beta p_KK)).
double gittins_index(const Pmf& pi, const ProblemSpec& spec);

/// Whether pi lies in the band P_{K-1} <=st pi <=st P_K where the closed
/// form is established.
bool gittins_in_band(const Pmf& pi, const ProblemSpec& spec);

PolicyDecision gittins_action(const BeliefState& belief, const ProblemSpec& spec, int t = 1);

/// Opaque per-policy memory carried along a sample path (e.g. an ordering).
using PolicyMemory = std::vector<int>;

/// A sensing policy evaluated on belief states. History-dependent policies
/// keep their history in PolicyMemory, which the evaluators thread through.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual PolicyMemory initial_memory(const BeliefState&) const { return {}; }
  virtual PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory& memory) = 0;
  virtual PolicyMemory update(const PolicyMemory& memory, int /*channel*/, int /*state*/) const {
    return memory;
  }
  /// Randomized policies pick uniformly among channels; exact evaluators
  /// average over that choice instead of calling decide().
  virtual bool randomized() const { return false; }
  /// Independent copy; `stream` reseeds any generator the policy owns.
  virtual std::unique_ptr<Policy> fork(std::uint64_t stream) const = 0;
};

class MyopicPolicy final : public Policy {
 public:
  explicit MyopicPolicy(bool allow_fallback = false, RewardVector rewards = {})
      : allow_fallback_(allow_fallback), rewards_(std::move(rewards)) {}
  std::string name() const override { return "myopic"; }
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory&) override;
  std::unique_ptr<Policy> fork(std::uint64_t) const override {
    return std::make_unique<MyopicPolicy>(*this);
  }

 private:
  bool allow_fallback_;
  RewardVector rewards_;
};

class GittinsPolicy final : public Policy {
 public:
  explicit GittinsPolicy(ProblemSpec spec);
  std::string name() const override { return "gittins"; }
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory&) override;
  std::unique_ptr<Policy> fork(std::uint64_t) const override {
    return std::make_unique<GittinsPolicy>(*this);
  }

 private:
  ProblemSpec spec_;
};

/// Ordering-based policy: sense O(N); rotate with S after a observation
/// below the threshold. With no explicit start ordering the start is the
/// dominance ordering of the initial belief.
class OrderingPolicy final : public Policy {
 public:
  OrderingPolicy(int threshold, std::optional<ChannelOrdering> start = std::nullopt)
      : threshold_(threshold), start_(std::move(start)) {}
  std::string name() const override;
  PolicyMemory initial_memory(const BeliefState& belief) const override;
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory& memory) override;
  PolicyMemory update(const PolicyMemory& memory, int channel, int state) const override;
  std::unique_ptr<Policy> fork(std::uint64_t) const override {
    return std::make_unique<OrderingPolicy>(*this);
  }

 private:
  int threshold_;
  std::optional<ChannelOrdering> start_;
};

class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(int channel) : channel_(channel) {}
  std::string name() const override { return "fixed:" + std::to_string(channel_); }
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory&) override;
  std::unique_ptr<Policy> fork(std::uint64_t) const override {
    return std::make_unique<FixedPolicy>(*this);
  }

 private:
  int channel_;
};

/// Channel (start + t - 1) mod N + 1 at time t.
class RoundRobinPolicy final : public Policy {
 public:
  explicit RoundRobinPolicy(int start = 1) : start_(start) {}
  std::string name() const override { return "round_robin"; }
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory&) override;
  std::unique_ptr<Policy> fork(std::uint64_t) const override {
    return std::make_unique<RoundRobinPolicy>(*this);
  }

 private:
  int start_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string name() const override { return "random"; }
  PolicyDecision decide(const BeliefState& belief, int t, const PolicyMemory&) override;
  bool randomized() const override { return true; }
  std::unique_ptr<Policy> fork(std::uint64_t stream) const override;

 private:
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

/// Baseline selector used by the CLI: random(seed), fixed(n), round_robin.
struct BaselineKind {
  enum class Kind { Random, Fixed, RoundRobin } kind = Kind::Fixed;
  int channel = 1;
  std::uint64_t seed = 0;
};

std::unique_ptr<Policy> make_baseline(const BaselineKind& kind);

/// Parses "myopic", "gittins", "ordering:<c1,c2,...>", "ordering:sorted",
/// "fixed:<n>", "round_robin", "random". Throws InvalidArgument.
std::unique_ptr<Policy> make_policy(const std::string& name, const ProblemSpec& spec,
                                    std::uint64_t seed = 0);

}  // namespace sense
