#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sense/problem.hpp"

namespace sense {

inline constexpr double kConditionTol = 1e-9;

/// Reward-derived bounds used by the separation condition.
struct DerivedRewards {
  Eigen::VectorXd U;
  Eigen::VectorXd M;
  double h = 0.0;
};

/// U_i = R_i for i < L; for i >= L the rows satisfy
/// U_i = R_i + beta (P_i - P_{L-1}) U, solved as one linear system.
/// Throws DegenerateComputation when that system is singular.
Eigen::VectorXd compute_U(const ProblemSpec& spec);

/// M = U + beta * (sum_{i >= L} p_Ki) * P U.
Eigen::VectorXd compute_M(const ProblemSpec& spec, const Eigen::VectorXd& U);

/// h = (P_K R - beta sum_{i<L} p_Ki P_i R) / (1 - beta sum_{i<L} p_Ki).
double compute_h(const ProblemSpec& spec);

DerivedRewards compute_derived(const ProblemSpec& spec);

/// Result of testing whether a PMF is a convex combination of the rows of P.
struct HullMembership {
  bool member = false;
  /// Smallest mixing weight of the best feasible representation; when no
  /// exact representation exists, minus the smallest residual found.
  double margin = 0.0;
  Eigen::RowVectorXd weights;
};

/// pi in conv(P_1, ..., P_K), by exhaustive search over row subsets
/// (Caratheodory: some affinely independent subset suffices).
HullMembership hull_membership(const Pmf& pi, const TransitionMatrix& p,
                               double tol = kConditionTol);

struct Violation {
  std::string condition;   // "A1".."A4"
  std::string inequality;  // margin key
  std::vector<int> indices;
  double amount = 0.0;     // how far below zero the margin is
};

struct ConditionReport {
  bool a1_ok = false;
  bool a2_ok = false;
  bool a3_ok = false;
  bool a4_ok = false;
  bool a4_indeterminate = false;
  std::map<std::string, double> margins;     // gate: each must be >= -tol
  std::map<std::string, double> quantities;  // diagnostic values, not gated
  std::vector<Violation> failures;
  std::optional<DerivedRewards> derived;
  std::string degenerate_reason;

  bool all_ok() const { return a1_ok && a2_ok && a3_ok && a4_ok; }
};

ConditionReport check_conditions(const ProblemSpec& spec);

/// The K = 2 form of the conditions, in terms of p_12, p_22 and the
/// initial success probabilities p^n.
struct TwoStateReport {
  double p12 = 0.0;
  double p22 = 0.0;
  std::vector<double> p_initial;
  bool positively_correlated = false;  // p_22 >= p_12
  bool initial_membership = false;     // p_12 <= p^n <= p_22
  bool initial_chain = false;          // p^1 <= ... <= p^N
  bool general_check_ok = false;       // check_conditions(spec).all_ok()
  bool ok() const { return positively_correlated && initial_membership && initial_chain; }
  bool agrees_with_general() const { return ok() == general_check_ok; }
};

TwoStateReport two_state_reduce(const ProblemSpec& spec);

}  // namespace sense
