#pragma once

#include <string>

#include "sense/io.hpp"
#include "sense/problem.hpp"

namespace sense::test {

inline std::string fixture(const std::string& name) {
  return std::string(SENSE_FIXTURE_DIR) + "/" + name;
}

inline ProblemSpec example_spec() { return load_instance(fixture("five_state.json")); }

// Distance between a computed row and a four-decimal reference.
template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace sense::test
