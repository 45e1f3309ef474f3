#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <map>

#include "support/test_util.hpp"
#include "textnav/envsim.hpp"
#include "textnav/router.hpp"

using namespace textnav;
using textnav::testing::make_path;
using textnav::testing::toy_map;

namespace {

RouteQuery query(const char* start, const char* goal) {
  return RouteQuery{NodeName{start}, NodeName{goal}};
}

// independent distance oracle over the raw edge list
std::map<std::string, int> oracle_distances(
    const std::vector<std::pair<NodeName, NodeName>>& edges,
    const NodeName& from) {
  std::map<std::string, std::vector<std::string>> adjacency;
  for (const auto& [a, b] : edges) {
    adjacency[a.key()].push_back(b.key());
    adjacency[b.key()].push_back(a.key());
  }
  std::map<std::string, int> dist{{from.key(), 0}};
  std::deque<std::string> frontier{from.key()};
  while (!frontier.empty()) {
    const std::string u = frontier.front();
    frontier.pop_front();
    for (const auto& v : adjacency[u]) {
      if (dist.emplace(v, dist.at(u) + 1).second) {
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("the walkthrough query composes the remembered routes") {
  const auto result = find_route(toy_map(), query("n5", "n3"));
  REQUIRE(route_succeeded(result));
  CHECK(std::get<CanonicalPath>(result) ==
        make_path({"n5", "n4", "n2", "n3"},
                  {Action::TurnRight, Action::TurnLeft}));
}

TEST_CASE("a stored route is answered directly") {
  const auto result = find_route(toy_map(), query("n1", "n3"));
  REQUIRE(route_succeeded(result));
  CHECK(std::get<CanonicalPath>(result) ==
        make_path({"n1", "n2", "n3"}, {Action::TurnRight}));
}

TEST_CASE("unknown endpoints are reported by name") {
  const auto result = find_route(toy_map(), query("n3", "n6"));
  REQUIRE_FALSE(route_succeeded(result));
  const auto& failure = std::get<RouteFailure>(result);
  CHECK(failure.kind == RouteFailure::Kind::UnknownNode);
  REQUIRE(failure.node.has_value());
  CHECK(*failure.node == NodeName{"n6"});
}

TEST_CASE("queries across disconnected components fail with no-path") {
  TopoMap map;
  map.add_path(make_path({"a", "b"}));
  map.add_path(make_path({"c", "d"}));
  const auto result = find_route(map, query("a", "d"));
  REQUIRE_FALSE(route_succeeded(result));
  CHECK(std::get<RouteFailure>(result).kind == RouteFailure::Kind::NoPath);
}

TEST_CASE("equal start and goal is a caller error") {
  CHECK_THROWS_AS(find_route(toy_map(), query("n1", "N1")),
                  std::invalid_argument);
}

TEST_CASE("a reachable goal without derivable actions names the blocker") {
  TopoMap map;
  map.add_path(make_path({"a", "b"}));
  map.add_path(make_path({"b", "c"}));
  const auto result = find_route(map, query("a", "c"));
  REQUIRE_FALSE(route_succeeded(result));
  const auto& failure = std::get<RouteFailure>(result);
  CHECK(failure.kind == RouteFailure::Kind::InsufficientInformation);
  REQUIRE(failure.triple.has_value());
  CHECK((*failure.triple)[0] == NodeName{"a"});
  CHECK((*failure.triple)[1] == NodeName{"b"});
  CHECK((*failure.triple)[2] == NodeName{"c"});
}

TEST_CASE("a blocked shortest candidate falls back to an equal-length one") {
  TopoMap map;
  map.add_path(make_path({"a", "b1"}));
  map.add_path(make_path({"b1", "c"}));
  map.add_path(make_path({"a", "b2", "c"}, {Action::Forward}));
  // [a, b1, c] comes first lexicographically but has no action information
  const auto result = find_route(map, query("a", "c"));
  REQUIRE(route_succeeded(result));
  CHECK(std::get<CanonicalPath>(result) ==
        make_path({"a", "b2", "c"}, {Action::Forward}));
}

TEST_CASE("queries resolve case-insensitively and answer stored casing") {
  TopoMap map;
  map.add_path(make_path({"Lobby", "Hallway", "Kitchen"}, {Action::TurnLeft}));
  const auto result = find_route(map, query("lobby", "KITCHEN"));
  REQUIRE(route_succeeded(result));
  const auto& path = std::get<CanonicalPath>(result);
  CHECK(path.waypoints.front().text() == "Lobby");
  CHECK(path.waypoints.back().text() == "Kitchen");
}

TEST_CASE("identical queries give identical answers") {
  const TopoMap map = toy_map();
  const auto first = find_route(map, query("n5", "n3"));
  const auto second = find_route(map, query("n5", "n3"));
  REQUIRE(route_succeeded(first));
  REQUIRE(route_succeeded(second));
  CHECK(std::get<CanonicalPath>(first) == std::get<CanonicalPath>(second));
}

TEST_CASE("routes over full environment maps have true shortest length") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const GeoEnvironment env = generate_environment(seed, 12);
    const TopoMap map = full_map(env);
    const auto designated = env.designated();
    for (const NodeName& start : designated) {
      const auto dist = oracle_distances(map.edges(), start);
      for (const NodeName& goal : designated) {
        if (start == goal) {
          continue;
        }
        const auto result = find_route(map, RouteQuery{start, goal});
        REQUIRE(route_succeeded(result));
        const auto& path = std::get<CanonicalPath>(result);
        CHECK(path.waypoints.size() ==
              static_cast<std::size_t>(dist.at(goal.key())) + 1);
      }
    }
  }
}

TEST_CASE("reversing an answer gives a valid answer for the flipped query") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const GeoEnvironment env = generate_environment(seed, 12);
    const TopoMap map = full_map(env);
    const auto designated = env.designated();
    for (const NodeName& start : designated) {
      for (const NodeName& goal : designated) {
        if (start == goal) {
          continue;
        }
        const auto result = find_route(map, RouteQuery{start, goal});
        REQUIRE(route_succeeded(result));
        const CanonicalPath reversed =
            reverse(std::get<CanonicalPath>(result));
        CHECK(is_valid(reversed));
        for (std::size_t i = 1; i + 1 < reversed.waypoints.size(); ++i) {
          const auto derived = map.infer_action(
              reversed.waypoints[i - 1].key(), reversed.waypoints[i].key(),
              reversed.waypoints[i + 1].key());
          REQUIRE(derived.has_value());
          CHECK(*derived == reversed.actions[i - 1]);
        }
      }
    }
  }
}
