#include "sense/policies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sense/random.hpp"

namespace sense {

ChannelOrdering::ChannelOrdering(std::vector<int> order) : order_(std::move(order)) {
  std::vector<int> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i) + 1) {
      throw InvalidArgument("ordering is not a permutation of 1..N");
    }
  }
  if (order_.empty()) throw InvalidArgument("ordering is empty");
}

ChannelOrdering ChannelOrdering::identity(int n) {
  std::vector<int> o(n);
  for (int i = 0; i < n; ++i) o[i] = i + 1;
  return ChannelOrdering(std::move(o));
}

int ChannelOrdering::position_of(int channel) const {
  const auto it = std::find(order_.begin(), order_.end(), channel);
  if (it == order_.end()) throw InvalidArgument("channel not in ordering");
  return static_cast<int>(it - order_.begin()) + 1;
}

ChannelOrdering shift(const ChannelOrdering& o) {
  std::vector<int> v = o.order();
  std::rotate(v.rbegin(), v.rbegin() + 1, v.rend());
  return ChannelOrdering(std::move(v));
}

ChannelOrdering shift_ccw(const ChannelOrdering& o, int m) {
  if (m < 0 || m >= o.size()) throw InvalidArgument("shift_ccw: m must lie in 0..N-1");
  std::vector<int> v = o.order();
  std::rotate(v.begin(), v.begin() + m, v.end());
  return ChannelOrdering(std::move(v));
}

namespace {
void check_pair(const ChannelOrdering& o, int n, int m, const char* what) {
  if (!(1 <= m && m < n && n <= o.size())) {
    throw InvalidArgument(std::string(what) + ": requires 1 <= m < n <= N");
  }
}
}  // namespace

ChannelOrdering swap(const ChannelOrdering& o, int n, int m) {
  check_pair(o, n, m, "swap");
  std::vector<int> v = o.order();
  std::swap(v[n - 1], v[m - 1]);
  return ChannelOrdering(std::move(v));
}

ChannelOrdering lift(const ChannelOrdering& o, int n, int m) {
  check_pair(o, n, m, "lift");
  std::vector<int> v = o.order();
  std::rotate(v.begin() + (m - 1), v.begin() + (n - 1), v.begin() + n);
  return ChannelOrdering(std::move(v));
}

ChannelOrdering ordering_policy_step(const ChannelOrdering& o, int observed_state, int threshold) {
  return observed_state >= threshold ? o : shift(o);
}

namespace {

// Lowest channel among `candidates` whose PMF dominates all other candidates.
std::optional<int> dominant_channel(const BeliefState& belief, const std::vector<int>& candidates) {
  for (int n : candidates) {
    bool all = true;
    for (int m : candidates) {
      if (m != n && !dominates(belief.pmf(n), belief.pmf(m))) {
        all = false;
        break;
      }
    }
    if (all) return n;
  }
  return std::nullopt;
}

}  // namespace

ChannelOrdering dominance_ordering(const BeliefState& belief) {
  std::vector<int> remaining;
  for (int n = 1; n <= belief.channels(); ++n) remaining.push_back(n);
  std::vector<int> order(remaining.size());
  for (int pos = belief.channels(); pos >= 1; --pos) {
    const auto best = dominant_channel(belief, remaining);
    if (!best) throw IncomparableBeliefs("channel beliefs do not form a dominance chain");
    order[pos - 1] = *best;
    remaining.erase(std::find(remaining.begin(), remaining.end(), *best));
  }
  return ChannelOrdering(std::move(order));
}

std::string to_string(Rationale r) {
  switch (r) {
    case Rationale::MyopicDominance: return "myopic_dominance";
    case Rationale::MyopicFallback: return "myopic_fallback";
    case Rationale::OrderingRightmost: return "ordering_rightmost";
    case Rationale::GittinsArgmax: return "gittins_argmax";
    case Rationale::Fixed: return "fixed";
    case Rationale::RoundRobin: return "round_robin";
    case Rationale::Random: return "random";
    case Rationale::Tabulated: return "tabulated";
  }
  return "unknown";
}

PolicyDecision myopic_action(const BeliefState& belief, const RewardVector* fallback_rewards) {
  std::vector<int> all;
  for (int n = 1; n <= belief.channels(); ++n) all.push_back(n);
  PolicyDecision d;
  if (const auto best = dominant_channel(belief, all)) {
    d.channel = *best;
    d.rationale = Rationale::MyopicDominance;
    return d;
  }
  if (fallback_rewards == nullptr) {
    throw IncomparableBeliefs("no channel's PMF dominates all others");
  }
  double best_value = -1e300;
  for (int n = 1; n <= belief.channels(); ++n) {
    const double v = belief.pmf(n).expect(fallback_rewards->values());
    d.scores.push_back(v);
    if (v > best_value) {
      best_value = v;
      d.channel = n;
    }
  }
  d.rationale = Rationale::MyopicFallback;
  d.warnings.push_back("beliefs incomparable; fell back to expected-reward argmax");
  return d;
}

double gittins_index(const Pmf& pi, const ProblemSpec& spec) {
  const double beta = spec.discount;
  if (beta >= 1.0) throw DegenerateComputation("Gittins index requires discount < 1");
  if (pi.size() != spec.n_states) throw DimensionMismatch("gittins_index: dimension mismatch");
  const int k = spec.n_states;
  const double pkk = spec.p()(k - 1, k - 1);
  const double b_k = 1.0 / (1.0 - beta * pkk);
  const double a_k = spec.row_reward(k) * b_k;
  const double top = pi.at(k);
  return (pi.expect(spec.r()) + beta * top * a_k) / (1.0 + beta * top * b_k);
}

bool gittins_in_band(const Pmf& pi, const ProblemSpec& spec) {
  const int k = spec.n_states;
  return dominates(pi, spec.transition.row(k - 1)) && dominates(spec.transition.row(k), pi);
}

PolicyDecision gittins_action(const BeliefState& belief, const ProblemSpec& spec, int t) {
  PolicyDecision d;
  d.rationale = Rationale::GittinsArgmax;
  d.time_zero = t == 0;
  if (spec.threshold != spec.n_states) {
    d.warnings.push_back("closed-form index is established only for L = K");
  }
  double best = -1e300;
  for (int n = 1; n <= belief.channels(); ++n) {
    const double v = gittins_index(belief.pmf(n), spec);
    d.scores.push_back(v);
    if (v > best) {
      best = v;
      d.channel = n;
    }
    if (!gittins_in_band(belief.pmf(n), spec)) {
      d.warnings.push_back("channel " + std::to_string(n) + " belief outside the closed-form band");
    }
  }
  // Beliefs equal up to the dominance tolerance are ties whatever their index
  // rounding says; they go to the lowest channel, as in the myopic rule.
  const Pmf& top = belief.pmf(d.channel);
  for (int n = 1; n < d.channel; ++n) {
    if (dominates(belief.pmf(n), top) && dominates(top, belief.pmf(n))) {
      d.channel = n;
      break;
    }
  }
  if (d.time_zero) d.warnings.push_back("index rule is not guaranteed optimal at t = 0");
  return d;
}

PolicyDecision MyopicPolicy::decide(const BeliefState& belief, int, const PolicyMemory&) {
  return myopic_action(belief, allow_fallback_ ? &rewards_ : nullptr);
}

GittinsPolicy::GittinsPolicy(ProblemSpec spec) : spec_(std::move(spec)) {
  if (spec_.discount >= 1.0) throw DegenerateComputation("Gittins rule requires discount < 1");
}

PolicyDecision GittinsPolicy::decide(const BeliefState& belief, int t, const PolicyMemory&) {
  return gittins_action(belief, spec_, t);
}

std::string OrderingPolicy::name() const {
  if (!start_) return "ordering:sorted";
  std::ostringstream os;
  os << "ordering:";
  for (int i = 1; i <= start_->size(); ++i) os << (i > 1 ? "," : "") << start_->at(i);
  return os.str();
}

PolicyMemory OrderingPolicy::initial_memory(const BeliefState& belief) const {
  if (start_) {
    if (start_->size() != belief.channels()) {
      throw InvalidArgument("ordering size differs from number of channels");
    }
    return start_->order();
  }
  return dominance_ordering(belief).order();
}

PolicyDecision OrderingPolicy::decide(const BeliefState&, int, const PolicyMemory& memory) {
  PolicyDecision d;
  d.channel = memory.back();
  d.rationale = Rationale::OrderingRightmost;
  return d;
}

PolicyMemory OrderingPolicy::update(const PolicyMemory& memory, int, int state) const {
  return ordering_policy_step(ChannelOrdering(memory), state, threshold_).order();
}

PolicyDecision FixedPolicy::decide(const BeliefState& belief, int, const PolicyMemory&) {
  if (channel_ < 1 || channel_ > belief.channels()) {
    throw InvalidArgument("fixed policy channel out of range");
  }
  PolicyDecision d;
  d.channel = channel_;
  d.rationale = Rationale::Fixed;
  return d;
}

PolicyDecision RoundRobinPolicy::decide(const BeliefState& belief, int t, const PolicyMemory&) {
  const int n = belief.channels();
  PolicyDecision d;
  d.channel = ((start_ - 1 + t) % n + n) % n + 1;
  d.rationale = Rationale::RoundRobin;
  return d;
}

PolicyDecision RandomPolicy::decide(const BeliefState& belief, int, const PolicyMemory&) {
  PolicyDecision d;
  d.channel = uniform_int(rng_, 1, belief.channels());
  d.rationale = Rationale::Random;
  return d;
}

std::unique_ptr<Policy> RandomPolicy::fork(std::uint64_t stream) const {
  return std::make_unique<RandomPolicy>(derive_seed(seed_, stream));
}

std::unique_ptr<Policy> make_baseline(const BaselineKind& kind) {
  switch (kind.kind) {
    case BaselineKind::Kind::Random: return std::make_unique<RandomPolicy>(kind.seed);
    case BaselineKind::Kind::Fixed: return std::make_unique<FixedPolicy>(kind.channel);
    case BaselineKind::Kind::RoundRobin: return std::make_unique<RoundRobinPolicy>(kind.channel);
  }
  throw InvalidArgument("unknown baseline");
}

std::unique_ptr<Policy> make_policy(const std::string& name, const ProblemSpec& spec,
                                    std::uint64_t seed) {
  if (name == "myopic") return std::make_unique<MyopicPolicy>();
  if (name == "myopic_fallback") return std::make_unique<MyopicPolicy>(true, spec.reward);
  if (name == "gittins") return std::make_unique<GittinsPolicy>(spec);
  if (name == "round_robin") return std::make_unique<RoundRobinPolicy>(1);
  if (name == "random") return std::make_unique<RandomPolicy>(seed);
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    const std::string head = name.substr(0, colon);
    const std::string arg = name.substr(colon + 1);
    if (head == "fixed") {
      std::size_t used = 0;
      int n = 0;
      try {
        n = std::stoi(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != arg.size()) throw InvalidArgument("fixed policy needs a channel number");
      if (n < 1 || n > spec.n_channels) throw InvalidArgument("fixed policy channel out of range");
      return std::make_unique<FixedPolicy>(n);
    }
    if (head == "ordering") {
      if (arg == "sorted") return std::make_unique<OrderingPolicy>(spec.threshold);
      std::vector<int> perm;
      std::stringstream ss(arg);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          perm.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw InvalidArgument("ordering entries must be channel numbers");
        }
      }
      ChannelOrdering o(std::move(perm));
      if (o.size() != spec.n_channels) throw InvalidArgument("ordering size differs from N");
      return std::make_unique<OrderingPolicy>(spec.threshold, std::move(o));
    }
  }
  throw InvalidArgument("unknown policy '" + name + "'");
}

}  // namespace sense
