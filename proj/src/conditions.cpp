#include "sense/conditions.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sense {
namespace {

std::string idx(int i) { return std::to_string(i); }

void record(ConditionReport& report, const std::string& condition, const std::string& key,
            double margin, std::vector<int> indices) {
  report.margins[key] = margin;
  if (margin < -kConditionTol) {
    report.failures.push_back({condition, key, std::move(indices), -margin});
  }
}

bool all_margins_ok(const ConditionReport& report, const std::string& prefix) {
  for (const auto& [key, value] : report.margins) {
    if (key.rfind(prefix, 0) == 0 && value < -kConditionTol) return false;
  }
  return true;
}

}  // namespace

Eigen::VectorXd compute_U(const ProblemSpec& spec) {
  const int k = spec.n_states;
  const int l = spec.threshold;
  const double beta = spec.discount;
  const Eigen::MatrixXd& p = spec.p();
  const Eigen::VectorXd& r = spec.r();

  const int lo = l - 1;      // number of states below L
  const int hi = k - l + 1;  // unknowns U_L..U_K
  Eigen::MatrixXd d = p.bottomRows(hi).rowwise() - p.row(l - 2);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(hi, hi) - beta * d.rightCols(hi);
  Eigen::VectorXd b = r.tail(hi) + beta * d.leftCols(lo) * r.head(lo);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (lu.rank() < hi) {
    throw DegenerateComputation("U system is singular (rank " + std::to_string(lu.rank()) +
                                " of " + std::to_string(hi) + ")");
  }
  Eigen::VectorXd u = r;
  u.tail(hi) = lu.solve(b);

  for (int i = l - 1; i < k; ++i) {
    const double residual = u(i) - r(i) - beta * (p.row(i) - p.row(l - 2)).dot(u);
    if (!std::isfinite(u(i)) || std::abs(residual) >= 1e-9) {
      throw DegenerateComputation("U system solve failed residual gate at U_" + idx(i + 1));
    }
  }
  return u;
}

Eigen::VectorXd compute_M(const ProblemSpec& spec, const Eigen::VectorXd& U) {
  const int k = spec.n_states;
  const int l = spec.threshold;
  const double mass = spec.p().row(k - 1).tail(k - l + 1).sum();
  return U + spec.discount * mass * (spec.p() * U);
}

double compute_h(const ProblemSpec& spec) {
  const int k = spec.n_states;
  const int l = spec.threshold;
  const double beta = spec.discount;
  const Eigen::MatrixXd& p = spec.p();
  const Eigen::VectorXd pr = p * spec.r();
  double low_mass = 0.0;
  double low_value = 0.0;
  for (int i = 0; i < l - 1; ++i) {
    low_mass += p(k - 1, i);
    low_value += p(k - 1, i) * pr(i);
  }
  const double denominator = 1.0 - beta * low_mass;
  if (std::abs(denominator) <= 1e-12) {
    throw DegenerateComputation("h denominator 1 - beta * sum_{i<L} p_Ki vanishes");
  }
  return (pr(k - 1) - beta * low_value) / denominator;
}

DerivedRewards compute_derived(const ProblemSpec& spec) {
  DerivedRewards d;
  d.U = compute_U(spec);
  d.M = compute_M(spec, d.U);
  d.h = compute_h(spec);
  return d;
}

HullMembership hull_membership(const Pmf& pi, const TransitionMatrix& p, double tol) {
  const Eigen::Index k = p.states();
  if (pi.size() != k) throw DimensionMismatch("hull membership: dimension mismatch");
  if (k > 16) throw InvalidArgument("hull membership: subset search limited to K <= 16");

  Eigen::VectorXd target(k + 1);
  target.head(k) = pi.probs().transpose();
  target(k) = 1.0;

  HullMembership best;
  best.margin = -std::numeric_limits<double>::infinity();
  const unsigned long subsets = 1ul << k;
  for (unsigned long mask = 1; mask < subsets; ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (mask & (1ul << i)) rows.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd a(k + 1, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      a.col(c).head(k) = p.matrix().row(rows[c]).transpose();
      a(k, c) = 1.0;
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(target);
    const double residual = (a * x - target).cwiseAbs().maxCoeff();
    const double min_weight = x.minCoeff();
    const double score = residual <= tol ? min_weight : -residual;
    if (score > best.margin) {
      best.margin = score;
      best.weights = Eigen::RowVectorXd::Zero(k);
      for (Eigen::Index c = 0; c < m; ++c) best.weights(rows[c]) = x(c);
    }
    if (residual <= tol && min_weight >= -tol) best.member = true;
  }
  return best;
}

ConditionReport check_conditions(const ProblemSpec& spec) {
  spec.validate();
  ConditionReport report;
  const int k = spec.n_states;
  const int l = spec.threshold;
  const double beta = spec.discount;
  const auto& tm = spec.transition;

  for (int i = 2; i <= k; ++i) {
    record(report, "A1", "a1.P" + idx(i) + ">=P" + idx(i - 1),
           dominance_margin(tm.row(i), tm.row(i - 1)), {i, i - 1});
  }
  report.a1_ok = all_margins_ok(report, "a1.");

  for (int n = 1; n <= spec.n_channels; ++n) {
    const auto m = hull_membership(spec.initial_pmfs[n - 1], tm);
    record(report, "A2", "a2.pi" + idx(n) + "_in_hull", m.margin, {n});
  }
  for (int n = 2; n <= spec.n_channels; ++n) {
    record(report, "A2", "a2.pi" + idx(n) + ">=pi" + idx(n - 1),
           dominance_margin(spec.initial_pmfs[n - 1], spec.initial_pmfs[n - 2]), {n, n - 1});
  }
  report.a2_ok = all_margins_ok(report, "a2.");

  const Pmf p1p = evolve(tm.row(1), tm, 1);
  const Pmf pkp = evolve(tm.row(k), tm, 1);
  record(report, "A3", "a3.P1P>=P" + idx(l - 1), dominance_margin(p1p, tm.row(l - 1)), {1, l - 1});
  record(report, "A3", "a3.P" + idx(l) + ">=P" + idx(k) + "P", dominance_margin(tm.row(l), pkp),
         {l, k});
  report.a3_ok = all_margins_ok(report, "a3.");

  try {
    DerivedRewards d = compute_derived(spec);
    const Eigen::MatrixXd& p = spec.p();
    const Eigen::VectorXd& r = spec.r();
    for (int i = 2; i <= k; ++i) {
      if (i == l) continue;
      const Eigen::RowVectorXd diff = p.row(i - 1) - p.row(i - 2);
      const double gap = r(i - 1) - r(i - 2);
      const double dm = beta * diff.dot(d.M);
      const double du = beta * diff.dot(d.U);
      const std::string pair = "(P" + idx(i) + "-P" + idx(i - 1) + ")";
      report.quantities["b" + pair + "M"] = dm;
      report.quantities["b" + pair + "U"] = du;
      record(report, "A4", "a4.R" + idx(i) + "-R" + idx(i - 1) + ">=b" + pair + "M", gap - dm,
             {i, i - 1});
      record(report, "A4", "a4.b" + pair + "M>=b" + pair + "U", dm - du, {i, i - 1});
      record(report, "A4", "a4.b" + pair + "U>=0", du, {i, i - 1});
    }
    const double hgap = beta * (d.h - spec.row_reward(l - 1));
    const std::string hkey = "b(h-P" + idx(l - 1) + "R)";
    report.quantities[hkey] = hgap;
    record(report, "A4", "a4.R" + idx(l) + "-R" + idx(l - 1) + ">=" + hkey,
           r(l - 1) - r(l - 2) - hgap, {l, l - 1});
    record(report, "A4", "a4." + hkey + ">=0", hgap, {l, l - 1});
    report.quantities["h"] = d.h;
    report.quantities["PKR"] = spec.row_reward(k);
    report.quantities["h-PKR"] = d.h - spec.row_reward(k);
    report.derived = std::move(d);
    report.a4_ok = all_margins_ok(report, "a4.");
  } catch (const DegenerateComputation& e) {
    report.a4_ok = false;
    report.a4_indeterminate = true;
    report.degenerate_reason = e.what();
    report.failures.push_back({"A4", "indeterminate", {}, 0.0});
  }
  return report;
}

TwoStateReport two_state_reduce(const ProblemSpec& spec) {
  if (spec.n_states != 2) throw InvalidArgument("two-state reduction requires K = 2");
  TwoStateReport out;
  out.p12 = spec.p()(0, 1);
  out.p22 = spec.p()(1, 1);
  for (const auto& pi : spec.initial_pmfs) out.p_initial.push_back(pi.at(2));
  const double tol = kConditionTol;
  out.positively_correlated = out.p22 >= out.p12 - tol;
  out.initial_membership = true;
  for (double p : out.p_initial) {
    if (p < out.p12 - tol || p > out.p22 + tol) out.initial_membership = false;
  }
  out.initial_chain = true;
  for (std::size_t n = 1; n < out.p_initial.size(); ++n) {
    if (out.p_initial[n] < out.p_initial[n - 1] - tol) out.initial_chain = false;
  }
  out.general_check_ok = check_conditions(spec).all_ok();
  return out;
}

}  // namespace sense
