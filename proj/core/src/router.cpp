#include "textnav/router.hpp"

#include <deque>
#include <functional>
#include <map>

namespace textnav {

namespace {

// unit-weight shortest distances to every node reachable from `from`
std::map<std::string, int> bfs_distances(const TopoMap& map,
                                         const NodeName& from) {
  std::map<std::string, int> dist;
  dist[from.key()] = 0;
  std::deque<NodeName> queue{from};
  while (!queue.empty()) {
    const NodeName u = queue.front();
    queue.pop_front();
    const int du = dist.at(u.key());
    for (const NodeName& v : map.neighbors(u.key())) {
      if (dist.emplace(v.key(), du + 1).second) {
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

std::string RouteFailure::describe() const {
  switch (kind) {
    case Kind::UnknownNode:
      return "unknown node \"" + (node ? node->text() : std::string("?")) +
             "\"";
    case Kind::NoPath:
      return "no path connects the start to the goal";
    case Kind::InsufficientInformation:
      if (triple) {
        return "not enough information to derive the action for (" +
               (*triple)[0].text() + " -> " + (*triple)[1].text() + " -> " +
               (*triple)[2].text() + ")";
      }
      return "not enough information to derive an interior action";
  }
  return "unknown failure";
}

RouteResult find_route(const TopoMap& map, const RouteQuery& query) {
  if (query.start == query.goal) {
    throw std::invalid_argument("start and goal must differ, both are \"" +
                                query.start.text() + "\"");
  }
  const auto start = map.find_node(query.start.key());
  if (!start) {
    return RouteFailure{RouteFailure::Kind::UnknownNode, query.start,
                        std::nullopt};
  }
  const auto goal = map.find_node(query.goal.key());
  if (!goal) {
    return RouteFailure{RouteFailure::Kind::UnknownNode, query.goal,
                        std::nullopt};
  }

  // distances measured to the goal, so candidate paths can be grown from
  // the start by stepping to any neighbor one unit closer
  const auto dist = bfs_distances(map, *goal);
  if (!dist.contains(start->key())) {
    return RouteFailure{RouteFailure::Kind::NoPath, std::nullopt,
                        std::nullopt};
  }

  const auto closer = [&](const NodeName& u) {
    std::vector<NodeName> out;
    const int du = dist.at(u.key());
    for (const NodeName& v : map.neighbors(u.key())) {
      const auto it = dist.find(v.key());
      if (it != dist.end() && it->second == du - 1) {
        out.push_back(v);  // neighbors() is already sorted
      }
    }
    return out;
  };

  // the greedy smallest-neighbor walk is the lexicographically first
  // shortest path; its first blocking triple names the failure when no
  // candidate works out
  std::optional<std::array<NodeName, 3>> blocking;
  {
    std::vector<NodeName> walk{*start};
    while (walk.back() != *goal) {
      walk.push_back(closer(walk.back()).front());
    }
    for (std::size_t i = 1; i + 1 < walk.size() && !blocking; ++i) {
      if (!map.infer_action(walk[i - 1].key(), walk[i].key(),
                            walk[i + 1].key())) {
        blocking = std::array<NodeName, 3>{walk[i - 1], walk[i], walk[i + 1]};
      }
    }
  }

  // depth-first over the shortest-path DAG in sorted neighbor order:
  // candidates appear in lexicographic order; prune a branch as soon as
  // one of its triples is not derivable
  std::vector<NodeName> path{*start};
  std::vector<Action> actions;
  std::function<bool()> extend = [&]() -> bool {
    const NodeName u = path.back();  // copy: push_back below reallocates
    if (u == *goal) {
      return true;
    }
    for (const NodeName& v : closer(u)) {
      if (path.size() >= 2) {
        const auto a = map.infer_action(path[path.size() - 2].key(), u.key(),
                                        v.key());
        if (!a) {
          continue;
        }
        actions.push_back(*a);
      }
      path.push_back(v);
      if (extend()) {
        return true;
      }
      path.pop_back();
      if (path.size() >= 2) {
        actions.pop_back();
      }
    }
    return false;
  };

  if (extend()) {
    return CanonicalPath{std::move(path), std::move(actions)};
  }
  return RouteFailure{RouteFailure::Kind::InsufficientInformation,
                      std::nullopt, blocking};
}

}  // namespace textnav
