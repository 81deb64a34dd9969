#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sense/core.hpp"

namespace sense {

/// A complete sensing instance: N identical channels with K-state Markov
/// quality, threshold L, discount beta, per-state rewards and initial beliefs.
struct ProblemSpec {
  int n_channels = 0;
  int n_states = 0;
  int threshold = 0;
  double discount = 1.0;
  TransitionMatrix transition;
  RewardVector reward;
  std::vector<Pmf> initial_pmfs;
  std::string label;

  /// Throws InvalidArgument / DimensionMismatch on any inconsistency.
  void validate() const;

  const Eigen::MatrixXd& p() const { return transition.matrix(); }
  const Eigen::VectorXd& r() const { return reward.values(); }
  /// Expected one-step reward of row P_i.
  double row_reward(int i) const { return transition.matrix().row(i - 1).dot(reward.values()); }
  double max_reward() const { return reward.values().maxCoeff(); }
};

ProblemSpec make_spec(Eigen::MatrixXd transition, Eigen::VectorXd reward,
                      std::vector<Eigen::RowVectorXd> initial_pmfs, int threshold,
                      double discount, std::string label = {});

/// Same instance with a different discount factor.
ProblemSpec with_discount(const ProblemSpec& spec, double discount);

/// Keeps the listed channels (1-based, in the given order).
ProblemSpec restrict_channels(const ProblemSpec& spec, const std::vector<int>& channels);

/// Where a channel's current belief came from.
/// Initial(n, s): pi^n_0 P^s.  Observed(i, s): P_i P^s.
struct Provenance {
  enum class Kind : std::uint8_t { Initial, Observed };
  Kind kind = Kind::Initial;
  int index = 1;  // channel n for Initial, state i for Observed (1-based)
  int steps = 0;

  static Provenance initial(int channel, int steps = 0) { return {Kind::Initial, channel, steps}; }
  static Provenance observed(int state, int steps = 0) { return {Kind::Observed, state, steps}; }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Beliefs of all N channels together with their provenance. Equality is
/// defined on provenance only.
class BeliefState {
 public:
  BeliefState() = default;
  BeliefState(std::vector<Provenance> provenance, std::vector<Pmf> pmfs);

  const std::vector<Pmf>& pmfs() const { return pmfs_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }
  int channels() const { return static_cast<int>(pmfs_.size()); }
  /// PMF of channel n (1-based).
  const Pmf& pmf(int channel) const { return pmfs_[channel - 1]; }

  friend bool operator==(const BeliefState& a, const BeliefState& b) {
    return a.provenance_ == b.provenance_;
  }

 private:
  std::vector<Provenance> provenance_;
  std::vector<Pmf> pmfs_;
};

/// PMF denoted by a provenance entry.
Pmf reconstruct(const ProblemSpec& spec, const Provenance& prov);

BeliefState canonical_belief(const ProblemSpec& spec, std::vector<Provenance> provenance);

/// Belief at time 0: every channel Initial(n, 0).
BeliefState initial_belief(const ProblemSpec& spec);

/// Successor after sensing `channel` and observing `state`: the sensed
/// channel becomes Observed(state, 0), every other channel ages by one step.
std::vector<Provenance> advance(const std::vector<Provenance>& provenance, int channel, int state);

/// Precomputed beliefs pi P^s for every provenance base and s = 0..max_steps.
/// Used by the exact recursions and the simulator; read-only after
/// construction.
class BeliefTable {
 public:
  BeliefTable(const ProblemSpec& spec, int max_steps);

  const Pmf& pmf(const Provenance& prov) const;
  double reward(const Provenance& prov) const;
  int max_steps() const { return max_steps_; }
  BeliefState materialize(const std::vector<Provenance>& provenance) const;
  const ProblemSpec& spec() const { return spec_; }

 private:
  std::size_t slot(const Provenance& prov) const;

  ProblemSpec spec_;
  int max_steps_;
  std::vector<Pmf> pmfs_;
  std::vector<double> rewards_;
};

}  // namespace sense
