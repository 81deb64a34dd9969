#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sense/io.hpp"
#include "sense/problem.hpp"

namespace sense {

enum class CheckStatus { Passed, Failed, Skipped };

std::string to_string(CheckStatus s);

/// A failing sample. `payload` holds everything evaluate_case needs to
/// recompute `margin` bit for bit: the spec, beliefs, orderings and indices.
struct Counterexample {
  Json payload;
  double margin = 0.0;
};

/// Outcome of one property battery. Every sample yields a margin; the sample
/// passes when margin >= -tolerance.
struct PropertyReport {
  std::string id;  // conditions, P1..P9, L1, T1..T4
  std::string description;
  CheckStatus status = CheckStatus::Skipped;
  std::string reason;  // set when skipped
  std::size_t samples = 0;
  std::size_t failure_count = 0;
  std::vector<Counterexample> failures;  // first few failing samples
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 1e-9;
  std::vector<std::string> notes;
};

struct VerifyConfig {
  std::uint64_t seed = 0;
  std::size_t samples = 1000;         // P1-P4, L1
  std::size_t configurations = 200;   // P5-P9
  int depth = 4;                      // largest T - t of the exact recursions
  int max_channels = 4;               // channels in P5-P9 configurations
  int theorem_horizon = 3;            // T1, T3
  int theorem_channels = 3;           // sub-ensemble size for T1, T3, T4
  std::size_t theorem_configs = 6;    // sub-ensembles per theorem check
  int infinite_channels = 2;          // sub-ensemble size for T2
  std::size_t infinite_configs = 2;
  double epsilon = 1e-8;              // truncation tolerance for T2
  double fallback_discount = 0.9;     // used by T2/T4 when the spec has discount 1
  int gittins_horizon = 5;
  std::size_t max_recorded_failures = 5;
  std::size_t node_budget = 10'000'000;
};

/// Runs the condition gate followed by every property battery. Batteries
/// whose hypotheses the spec does not meet are Skipped with a reason.
std::vector<PropertyReport> verify_all(const ProblemSpec& spec, const VerifyConfig& config);

/// Margin of a single sample of property `id` described by `payload`.
/// Deterministic; used by verify_all and for replaying counterexamples.
double evaluate_case(const std::string& id, const Json& payload);

/// Tolerance a sample of `id` is judged against.
double case_tolerance(const std::string& id, const Json& payload);

bool all_passed(const std::vector<PropertyReport>& reports);

Json to_json(const PropertyReport& report);
Json to_json(const std::vector<PropertyReport>& reports);

/// Number of reachable beliefs at t >= 1 (any action history, up to
/// `horizon`) where the Gittins and myopic rules choose different channels,
/// and the number of beliefs inspected.
struct AgreementCount {
  std::size_t nodes = 0;
  std::size_t disagreements = 0;
};
AgreementCount gittins_myopic_agreement(const ProblemSpec& spec, int horizon);

/// Same count split by time; entry t covers the beliefs reachable at time t,
/// including t = 0.
std::vector<AgreementCount> agreement_by_step(const ProblemSpec& spec, int horizon);

}  // namespace sense
