#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "support/test_util.hpp"
#include "textnav/canonical.hpp"

using namespace textnav;
using textnav::testing::make_path;
using textnav::testing::random_path;

TEST_CASE("node names trim, collapse whitespace and compare case-folded") {
  const NodeName a{"  Living   room "};
  CHECK(a.text() == "Living room");
  CHECK(a.key() == "living room");
  CHECK(a == NodeName{"LIVING ROOM"});
  CHECK(a == NodeName{"living\troom"});
  CHECK_FALSE(a == NodeName{"Livingroom"});
  CHECK(NodeName{"n5"} < NodeName{"n6"});
}

TEST_CASE("node names reject empty and multi-line labels") {
  CHECK_THROWS_AS(NodeName{""}, std::invalid_argument);
  CHECK_THROWS_AS(NodeName{"   "}, std::invalid_argument);
  CHECK_THROWS_AS(NodeName{"a\nb"}, std::invalid_argument);
}

TEST_CASE("validate accepts a proper path and reports each violation") {
  CHECK(validate(make_path({"n1", "n2", "n3"}, {Action::TurnRight})).empty());
  CHECK(validate(make_path({"a", "b"})).empty());

  const auto repeat = validate(make_path({"n1", "n1"}));
  REQUIRE(repeat.size() == 1);
  CHECK(repeat.front().message.find("consecutive") != std::string::npos);

  const auto mismatch = validate(make_path({"n1", "n2", "n3"}));
  REQUIRE(mismatch.size() == 1);
  CHECK(mismatch.front().message.find("actions") != std::string::npos);

  CHECK(validate(CanonicalPath{}).size() == 1);
  CHECK_FALSE(is_valid(make_path({"n1", "N1"})));  // case-folded repeat
}

TEST_CASE("reverse flips waypoints and inverts actions") {
  const auto reversed =
      reverse(make_path({"n1", "n2", "n3"}, {Action::TurnRight}));
  CHECK(reversed == make_path({"n3", "n2", "n1"}, {Action::TurnLeft}));

  CHECK(reverse(make_path({"a", "b"})) == make_path({"b", "a"}));

  CHECK_THROWS_AS(reverse(make_path({"n1", "n1"})), std::invalid_argument);
}

TEST_CASE("reverse is an involution that preserves validity") {
  DeterministicRng rng{2024};
  for (int i = 0; i < 200; ++i) {
    const CanonicalPath path = random_path(rng);
    REQUIRE(is_valid(path));
    const CanonicalPath back = reverse(path);
    CHECK(is_valid(back));
    CHECK(reverse(back) == path);
  }
}

TEST_CASE("paths round-trip through their JSON shape") {
  const auto path = make_path({"n5", "n4", "n2", "n3"},
                              {Action::TurnRight, Action::TurnLeft});
  nlohmann::json j;
  to_json(j, path);
  CHECK(j.at("waypoints") ==
        nlohmann::json::array({"n5", "n4", "n2", "n3"}));
  CHECK(j.at("actions") == nlohmann::json::array({"R", "L"}));

  CanonicalPath parsed;
  from_json(j, parsed);
  CHECK(parsed == path);
}

TEST_CASE("path JSON rejects unknown action tokens and missing fields") {
  CanonicalPath out;
  CHECK_THROWS(from_json(
      nlohmann::json{{"waypoints", {"a", "b", "c"}}, {"actions", {"Q"}}},
      out));
  CHECK_THROWS(from_json(nlohmann::json{{"waypoints", {"a", "b"}}}, out));
}

TEST_CASE("describe renders a compact route summary") {
  CHECK(describe(make_path({"n1", "n2", "n3"}, {Action::TurnRight})) ==
        "[n1, n2, n3] / [R]");
}
