#include "sense/problem.hpp"

#include <string>
#include <utility>

namespace sense {

void ProblemSpec::validate() const {
  if (n_channels < 1) throw InvalidArgument("n_channels must be at least 1");
  if (n_states < 2) throw InvalidArgument("n_states must be at least 2");
  if (threshold < 2 || threshold > n_states) {
    throw InvalidArgument("threshold_L must lie in 2..K (K = " + std::to_string(n_states) + ")");
  }
  if (!(discount > 0.0 && discount <= 1.0)) throw InvalidArgument("discount must lie in (0, 1]");
  if (transition.states() != n_states) throw DimensionMismatch("transition matrix is not K x K");
  if (reward.size() != n_states) throw DimensionMismatch("reward vector length differs from K");
  if (static_cast<int>(initial_pmfs.size()) != n_channels) {
    throw DimensionMismatch("expected " + std::to_string(n_channels) + " initial PMFs");
  }
  for (std::size_t n = 0; n < initial_pmfs.size(); ++n) {
    if (initial_pmfs[n].size() != n_states) {
      throw DimensionMismatch("initial PMF of channel " + std::to_string(n + 1) +
                              " has the wrong dimension");
    }
  }
}

ProblemSpec make_spec(Eigen::MatrixXd transition, Eigen::VectorXd reward,
                      std::vector<Eigen::RowVectorXd> initial_pmfs, int threshold,
                      double discount, std::string label) {
  ProblemSpec spec;
  spec.n_states = static_cast<int>(transition.rows());
  spec.n_channels = static_cast<int>(initial_pmfs.size());
  spec.threshold = threshold;
  spec.discount = discount;
  spec.transition = TransitionMatrix(std::move(transition));
  spec.reward = RewardVector(std::move(reward));
  spec.initial_pmfs.reserve(initial_pmfs.size());
  for (auto& row : initial_pmfs) spec.initial_pmfs.emplace_back(std::move(row));
  spec.label = std::move(label);
  spec.validate();
  return spec;
}

ProblemSpec with_discount(const ProblemSpec& spec, double discount) {
  ProblemSpec out = spec;
  out.discount = discount;
  out.validate();
  return out;
}

ProblemSpec restrict_channels(const ProblemSpec& spec, const std::vector<int>& channels) {
  ProblemSpec out = spec;
  out.initial_pmfs.clear();
  for (int c : channels) {
    if (c < 1 || c > spec.n_channels) throw InvalidArgument("channel index out of range");
    out.initial_pmfs.push_back(spec.initial_pmfs[c - 1]);
  }
  out.n_channels = static_cast<int>(channels.size());
  out.validate();
  return out;
}

BeliefState::BeliefState(std::vector<Provenance> provenance, std::vector<Pmf> pmfs)
    : provenance_(std::move(provenance)), pmfs_(std::move(pmfs)) {
  if (provenance_.size() != pmfs_.size()) {
    throw DimensionMismatch("belief state: provenance and PMF counts differ");
  }
}

Pmf reconstruct(const ProblemSpec& spec, const Provenance& prov) {
  if (prov.steps < 0) throw InvalidArgument("provenance steps must be non-negative");
  if (prov.kind == Provenance::Kind::Initial) {
    if (prov.index < 1 || prov.index > spec.n_channels) {
      throw InvalidArgument("provenance channel out of range");
    }
    return evolve(spec.initial_pmfs[prov.index - 1], spec.transition, prov.steps);
  }
  return evolve(spec.transition.row(prov.index), spec.transition, prov.steps);
}

BeliefState canonical_belief(const ProblemSpec& spec, std::vector<Provenance> provenance) {
  if (static_cast<int>(provenance.size()) != spec.n_channels) {
    throw DimensionMismatch("provenance list length differs from N");
  }
  std::vector<Pmf> pmfs;
  pmfs.reserve(provenance.size());
  for (const auto& p : provenance) pmfs.push_back(reconstruct(spec, p));
  return BeliefState(std::move(provenance), std::move(pmfs));
}

BeliefState initial_belief(const ProblemSpec& spec) {
  std::vector<Provenance> prov;
  for (int n = 1; n <= spec.n_channels; ++n) prov.push_back(Provenance::initial(n));
  return canonical_belief(spec, std::move(prov));
}

std::vector<Provenance> advance(const std::vector<Provenance>& provenance, int channel,
                                int state) {
  std::vector<Provenance> next = provenance;
  for (std::size_t n = 0; n < next.size(); ++n) {
    if (static_cast<int>(n) + 1 == channel) {
      next[n] = Provenance::observed(state, 0);
    } else {
      ++next[n].steps;
    }
  }
  return next;
}

BeliefTable::BeliefTable(const ProblemSpec& spec, int max_steps)
    : spec_(spec), max_steps_(max_steps) {
  if (max_steps < 0) throw InvalidArgument("belief table: negative step bound");
  const int bases = spec.n_channels + spec.n_states;
  pmfs_.reserve(static_cast<std::size_t>(bases) * (max_steps + 1));
  for (int b = 0; b < bases; ++b) {
    Pmf current = b < spec.n_channels ? spec.initial_pmfs[b]
                                      : spec.transition.row(b - spec.n_channels + 1);
    for (int s = 0; s <= max_steps; ++s) {
      pmfs_.push_back(current);
      rewards_.push_back(current.expect(spec.reward.values()));
      if (s < max_steps) current = evolve(current, spec.transition, 1);
    }
  }
}

std::size_t BeliefTable::slot(const Provenance& prov) const {
  if (prov.steps < 0 || prov.steps > max_steps_) {
    throw InvalidArgument("belief table: provenance age " + std::to_string(prov.steps) +
                          " beyond precomputed bound " + std::to_string(max_steps_));
  }
  const int base = prov.kind == Provenance::Kind::Initial ? prov.index - 1
                                                          : spec_.n_channels + prov.index - 1;
  return static_cast<std::size_t>(base) * (max_steps_ + 1) + prov.steps;
}

const Pmf& BeliefTable::pmf(const Provenance& prov) const { return pmfs_[slot(prov)]; }

double BeliefTable::reward(const Provenance& prov) const { return rewards_[slot(prov)]; }

BeliefState BeliefTable::materialize(const std::vector<Provenance>& provenance) const {
  std::vector<Pmf> pmfs;
  pmfs.reserve(provenance.size());
  for (const auto& p : provenance) pmfs.push_back(pmf(p));
  return BeliefState(provenance, std::move(pmfs));
}

}  // namespace sense
