#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sense/conditions.hpp"
#include "sense/problem.hpp"

namespace sense {

inline constexpr const char* kToolkitVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Instance document:
///   n_channels, n_states, threshold_L, discount, transition (K x K),
///   rewards (K), initial_pmfs (N x K), optional label, optional
///   normalize_rows (rescale rows whose sums are within 1e-3 of one).
/// Throws ParseError whose message starts with the offending field path.
ProblemSpec spec_from_json(const Json& doc);
Json spec_to_json(const ProblemSpec& spec);

/// Reads and parses an instance file; I/O failures are ParseError too.
ProblemSpec load_instance(const std::string& path);
std::string read_file(const std::string& path);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::optional<std::uint64_t> seed;
  std::string input_hash;
  std::optional<std::string> timestamp;  // only when explicitly requested
};

Json to_json(const RunManifest& m);

Json to_json(const ConditionReport& report);

Json vector_json(const Eigen::VectorXd& v);
Json vector_json(const Eigen::RowVectorXd& v);
Json matrix_json(const Eigen::MatrixXd& m);

/// 17 significant digits; parses back to the same double.
std::string format_double(double x);

/// Comma-separated, LF-terminated CSV row; fields containing a comma, quote
/// or newline are quoted.
std::string csv_row(const std::vector<std::string>& fields);

}  // namespace sense
