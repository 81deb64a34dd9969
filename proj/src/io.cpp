#include "sense/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sense {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const Json& field(const Json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) fail(key, "missing required field");
  return *it;
}

int integer_field(const Json& doc, const char* key) {
  const Json& v = field(doc, key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<int>();
}

double number_at(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

Eigen::RowVectorXd row_at(const Json& v, const std::string& path, int expected) {
  if (!v.is_array()) fail(path, "expected an array");
  if (static_cast<int>(v.size()) != expected) {
    fail(path, "expected " + std::to_string(expected) + " entries, found " +
                   std::to_string(v.size()));
  }
  Eigen::RowVectorXd out(expected);
  for (int j = 0; j < expected; ++j) {
    out(j) = number_at(v[j], path + "[" + std::to_string(j) + "]");
  }
  return out;
}

std::vector<Eigen::RowVectorXd> rows_at(const Json& v, const std::string& path, int rows,
                                        int cols) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  if (static_cast<int>(v.size()) != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(v.size()));
  }
  std::vector<Eigen::RowVectorXd> out;
  for (int i = 0; i < rows; ++i) out.push_back(row_at(v[i], path + "[" + std::to_string(i) + "]", cols));
  return out;
}

// Rows whose sums are within 1e-3 of one are rescaled to sum exactly to one.
void normalize(Eigen::RowVectorXd& row, const std::string& path) {
  const double s = row.sum();
  if (std::abs(s - 1.0) > 1e-3) fail(path, "row sum " + format_double(s) + " is not close to 1");
  row /= s;
}

}  // namespace

ProblemSpec spec_from_json(const Json& doc) {
  if (!doc.is_object()) fail("$", "expected an object");
  const int n = integer_field(doc, "n_channels");
  const int k = integer_field(doc, "n_states");
  const int threshold = integer_field(doc, "threshold_L");
  if (n < 1) fail("n_channels", "must be at least 1");
  if (k < 2) fail("n_states", "must be at least 2");
  const double beta = number_at(field(doc, "discount"), "discount");
  bool normalize_rows = false;
  if (const auto it = doc.find("normalize_rows"); it != doc.end()) {
    if (!it->is_boolean()) fail("normalize_rows", "expected a boolean");
    normalize_rows = it->get<bool>();
  }
  auto transition = rows_at(field(doc, "transition"), "transition", k, k);
  const Eigen::RowVectorXd rewards = row_at(field(doc, "rewards"), "rewards", k);
  auto initial = rows_at(field(doc, "initial_pmfs"), "initial_pmfs", n, k);
  if (normalize_rows) {
    for (int i = 0; i < k; ++i) normalize(transition[i], "transition[" + std::to_string(i) + "]");
    for (int i = 0; i < n; ++i) normalize(initial[i], "initial_pmfs[" + std::to_string(i) + "]");
  }
  std::string label;
  if (const auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) fail("label", "expected a string");
    label = it->get<std::string>();
  }

  Eigen::MatrixXd p(k, k);
  for (int i = 0; i < k; ++i) p.row(i) = transition[i];

  ProblemSpec spec;
  spec.n_channels = n;
  spec.n_states = k;
  spec.threshold = threshold;
  spec.discount = beta;
  spec.label = label;
  try {
    spec.transition = TransitionMatrix(p);
  } catch (const Error& e) {
    fail("transition", e.what());
  }
  try {
    spec.reward = RewardVector(rewards.transpose());
  } catch (const Error& e) {
    fail("rewards", e.what());
  }
  for (int i = 0; i < n; ++i) {
    try {
      spec.initial_pmfs.emplace_back(initial[i]);
    } catch (const Error& e) {
      fail("initial_pmfs[" + std::to_string(i) + "]", e.what());
    }
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    fail("$", e.what());
  }
  return spec;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json vector_json(const Eigen::RowVectorXd& v) { return vector_json(Eigen::VectorXd(v.transpose())); }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(Eigen::RowVectorXd(m.row(i))));
  return out;
}

Json spec_to_json(const ProblemSpec& spec) {
  Json doc;
  doc["n_channels"] = spec.n_channels;
  doc["n_states"] = spec.n_states;
  doc["threshold_L"] = spec.threshold;
  doc["discount"] = spec.discount;
  doc["transition"] = matrix_json(spec.p());
  doc["rewards"] = vector_json(spec.r());
  Json init = Json::array();
  for (const auto& pmf : spec.initial_pmfs) init.push_back(vector_json(pmf.probs()));
  doc["initial_pmfs"] = init;
  if (!spec.label.empty()) doc["label"] = spec.label;
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemSpec load_instance(const std::string& path) {
  const std::string text = read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("$: invalid JSON (" + std::string(e.what()) + ")");
  }
  return spec_from_json(doc);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json to_json(const RunManifest& m) {
  Json out;
  out["command"] = m.command;
  out["config"] = m.config;
  if (m.seed) out["seed"] = *m.seed;
  out["version"] = kToolkitVersion;
  out["input_hash"] = m.input_hash;
  if (m.timestamp) out["timestamp"] = *m.timestamp;
  return out;
}

Json to_json(const ConditionReport& report) {
  Json out;
  out["a1"] = report.a1_ok;
  out["a2"] = report.a2_ok;
  out["a3"] = report.a3_ok;
  out["a4"] = report.a4_ok;
  out["a4_indeterminate"] = report.a4_indeterminate;
  out["all_ok"] = report.all_ok();
  Json margins = Json::object();
  for (const auto& [k, v] : report.margins) margins[k] = v;
  out["margins"] = margins;
  Json quantities = Json::object();
  for (const auto& [k, v] : report.quantities) quantities[k] = v;
  out["quantities"] = quantities;
  if (report.derived) {
    out["derived"] = {{"U", vector_json(report.derived->U)},
                      {"M", vector_json(report.derived->M)},
                      {"h", report.derived->h}};
  } else {
    out["derived"] = nullptr;
  }
  Json failures = Json::array();
  for (const auto& v : report.failures) {
    failures.push_back({{"condition", v.condition},
                        {"inequality", v.inequality},
                        {"indices", v.indices},
                        {"amount", v.amount}});
  }
  out["failures"] = failures;
  if (!report.degenerate_reason.empty()) out["degenerate_reason"] = report.degenerate_reason;
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out += f;
    } else {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
  }
  out += '\n';
  return out;
}

}  // namespace sense
