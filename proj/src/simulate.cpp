#include <algorithm>
#include <cmath>
#include <thread>

#include "sense/evaluation.hpp"
#include "sense/random.hpp"

namespace sense {
namespace {

double run_replication(const ProblemSpec& spec, const BeliefTable& table, const Policy& prototype,
                       int horizon, std::uint64_t seed, std::size_t replication) {
  Rng rng(derive_seed(seed, replication));
  auto policy = prototype.fork(replication);
  const Eigen::MatrixXd& p = spec.p();

  std::vector<int> hidden(spec.n_channels);
  std::vector<Provenance> prov;
  for (int n = 1; n <= spec.n_channels; ++n) {
    hidden[n - 1] = static_cast<int>(sample_index(rng, spec.initial_pmfs[n - 1].probs())) + 1;
    prov.push_back(Provenance::initial(n));
  }
  PolicyMemory memory = policy->initial_memory(table.materialize(prov));

  double total = 0.0;
  double weight = 1.0;
  for (int t = 0; t <= horizon; ++t) {
    const BeliefState belief = table.materialize(prov);
    const int channel = policy->decide(belief, t, memory).channel;
    if (channel < 1 || channel > spec.n_channels) {
      throw InvalidArgument("policy chose an unknown channel");
    }
    const int observed = hidden[channel - 1];
    total += weight * spec.reward.at(observed);
    weight *= spec.discount;
    memory = policy->update(memory, channel, observed);
    prov = advance(prov, channel, observed);
    for (int& x : hidden) x = static_cast<int>(sample_index(rng, p.row(x - 1))) + 1;
  }
  return total;
}

}  // namespace

SimulationReport simulate(const ProblemSpec& spec, const Policy& policy, int horizon,
                          std::size_t replications, std::uint64_t seed, unsigned threads) {
  if (replications < 1) throw InvalidArgument("replications must be at least 1");
  if (horizon < 0) throw InvalidArgument("horizon must be non-negative");
  spec.validate();
  const BeliefTable table(spec, horizon + 1);

  SimulationReport report;
  report.replications = replications;
  report.seed = seed;
  report.policy = policy.name();
  report.totals.assign(replications, 0.0);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replications));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      report.totals[r] = run_replication(spec, table, policy, horizon, seed, r);
    }
  };
  if (threads <= 1) {
    work(0, replications);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (replications + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(replications, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double sum = 0.0;
  for (double x : report.totals) sum += x;
  report.mean = sum / static_cast<double>(replications);
  if (replications > 1) {
    double ss = 0.0;
    for (double x : report.totals) ss += (x - report.mean) * (x - report.mean);
    const double sd = std::sqrt(ss / static_cast<double>(replications - 1));
    report.standard_error = sd / std::sqrt(static_cast<double>(replications));
  }
  return report;
}

}  // namespace sense
