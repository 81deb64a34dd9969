#include <doctest.h>

#include "sense/conditions.hpp"
#include "sense/io.hpp"
#include "support.hpp"

using namespace sense;

namespace {
Json minimal() {
  return Json::parse(R"({
    "n_channels": 2, "n_states": 2, "threshold_L": 2, "discount": 0.9,
    "transition": [[0.7, 0.3], [0.2, 0.8]],
    "rewards": [0, 1],
    "initial_pmfs": [[0.6, 0.4], [0.4, 0.6]]
  })");
}

std::string parse_message(const Json& doc) {
  try {
    spec_from_json(doc);
  } catch (const ParseError& e) {
    return e.what();
  } catch (const std::exception& e) {
    return std::string("other: ") + e.what();
  }
  return "accepted";
}
}  // namespace

TEST_CASE("instance parsing") {
  SUBCASE("minimal document") {
    const ProblemSpec spec = spec_from_json(minimal());
    CHECK(spec.n_channels == 2);
    CHECK(spec.threshold == 2);
    CHECK(spec.transition(2, 2) == 0.8);
  }
  SUBCASE("error messages start with the field path") {
    Json d = minimal();
    d["transition"][1][1] = "high";
    CHECK(parse_message(d).rfind("transition[1][1]", 0) == 0);
    d = minimal();
    d.erase("rewards");
    CHECK(parse_message(d).rfind("rewards", 0) == 0);
    d = minimal();
    d["initial_pmfs"][0] = {0.5};
    CHECK(parse_message(d).find("initial_pmfs") != std::string::npos);
  }
  SUBCASE("rows off by rounding need the normalize flag") {
    Json d = minimal();
    d["transition"][0] = {0.7, 0.2999};
    CHECK(parse_message(d) != "accepted");
    d["normalize_rows"] = true;
    const ProblemSpec spec = spec_from_json(d);
    CHECK(spec.p().row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("semantic errors") {
    Json d = minimal();
    d["rewards"] = {1, 0};
    CHECK(parse_message(d) != "accepted");
    d = minimal();
    d["threshold_L"] = 3;
    CHECK(parse_message(d) != "accepted");
  }
  SUBCASE("the malformed fixture is rejected") {
    CHECK_THROWS_AS(load_instance(test::fixture("malformed.json")), ParseError);
    CHECK_THROWS(load_instance(test::fixture("does_not_exist.json")));
  }
}

TEST_CASE("instance round trip") {
  for (const char* name : {"five_state.json", "two_state.json", "identity.json"}) {
    const ProblemSpec a = load_instance(test::fixture(name));
    const ProblemSpec b = spec_from_json(Json::parse(spec_to_json(a).dump()));
    CHECK(a.p() == b.p());
    CHECK(a.r() == b.r());
    CHECK(a.discount == b.discount);
    REQUIRE(a.initial_pmfs.size() == b.initial_pmfs.size());
    for (std::size_t n = 0; n < a.initial_pmfs.size(); ++n) CHECK(a.initial_pmfs[n] == b.initial_pmfs[n]);
    CHECK(spec_to_json(a).dump() == spec_to_json(b).dump());
  }
}

TEST_CASE("doubles survive text round trips") {
  for (double x : {0.1, 1.0 / 3.0, 4.321274, 1e-300, -2.5e17}) {
    CHECK(Json::parse(Json(x).dump()).get<double>() == x);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("csv rows") {
  CHECK(csv_row({"a", "b"}) == "a,b\n");
  CHECK(csv_row({"x,y", "say \"hi\""}) == "\"x,y\",\"say \"\"hi\"\"\"\n");
  CHECK(csv_row({"line\nbreak"}) == "\"line\nbreak\"\n");
}

TEST_CASE("manifest and hashing") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  RunManifest m;
  m.command = "check";
  m.input_hash = fnv1a_hex("x");
  const Json j = to_json(m);
  CHECK(j["version"] == kToolkitVersion);
  CHECK_FALSE(j.contains("timestamp"));
}

TEST_CASE("condition report serialization") {
  const Json j = to_json(check_conditions(load_instance(test::fixture("five_state.json"))));
  CHECK(j["all_ok"] == true);
  CHECK(j["derived"]["U"].size() == 5);
  CHECK(j["failures"].empty());
}
