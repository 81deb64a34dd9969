#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sense/problem.hpp"
#include "sense/random.hpp"

namespace sense {

enum class SpecConstraint { Unconstrained, TryA1, TryA1toA4 };

std::string to_string(SpecConstraint c);
SpecConstraint parse_constraint(const std::string& name);

struct RandomSpecRequest {
  int n_states = 3;
  int n_channels = 2;
  int threshold = 2;
  double discount = 1.0;
  std::uint64_t seed = 0;
  SpecConstraint constraint = SpecConstraint::Unconstrained;
  std::size_t attempts = 1000;
  /// When set, candidates are perturbations of this spec; the request's
  /// dimensions and discount are ignored in favour of the base's.
  std::optional<ProblemSpec> base;
  double radius = 1e-3;
};

struct RandomSpecResult {
  std::optional<ProblemSpec> spec;
  std::size_t attempts_used = 0;
  std::string rejection;  // why the last candidate failed, when spec is empty

  double acceptance_rate() const {
    return attempts_used == 0 ? 0.0 : (spec ? 1.0 : 0.0) / static_cast<double>(attempts_used);
  }
};

/// Rejection sampler over instances. Unconstrained draws flat Dirichlet rows;
/// TryA1 sorts the tail sums of Dirichlet rows coordinate-wise so the rows
/// form a dominance chain; TryA1toA4 mixes two dominance-ordered base PMFs
/// with weights split at the threshold (or perturbs `base`) and keeps the
/// first candidate passing check_conditions.
RandomSpecResult random_spec(const RandomSpecRequest& request);

/// PMF whose tail sums are the entrywise maximum of those of a and b, so it
/// dominates both.
Eigen::RowVectorXd dominating_join(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b);

/// Flat-Dirichlet weights over the rows of P, mapped to a PMF in the hull.
Eigen::RowVectorXd sample_hull_pmf(Rng& rng, const TransitionMatrix& p);

/// Fisher-Yates shuffle of 1..n driven by rng.
std::vector<int> random_permutation(Rng& rng, int n);

}  // namespace sense
