#include "textnav/topo_map.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <nlohmann/json.hpp>

namespace textnav {

namespace {

std::pair<std::string, std::string> edge_key(const std::string& a,
                                             const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// offset carried by a stored action: bearing(next) - bearing(prev) mod 4
int relation_offset(Action a) {
  return (to_quarter_turns(a) + 2) % 4;
}

Action action_from_offset(int offset) {
  return from_quarter_turns(offset - 2);
}

}  // namespace

std::string MapConflict::describe() const {
  return "conflicting action at node \"" + node.text() + "\" for triple (" +
         prev.text() + " -> " + at.text() + " -> " + next.text() +
         "): map has " + std::string(action_name(stored)) + ", incoming is " +
         std::string(action_name(incoming));
}

NodeName TopoMap::add_node(const NodeName& name) {
  const auto it = nodes_.emplace(name.key(), name.text()).first;
  return NodeName(it->second);
}

void TopoMap::add_edge(const NodeName& a, const NodeName& b) {
  if (a == b) {
    throw std::invalid_argument("self-loop edge at \"" + a.text() + "\"");
  }
  add_node(a);
  add_node(b);
  edges_.insert(edge_key(a.key(), b.key()));
  adjacency_[a.key()].insert(b.key());
  adjacency_[b.key()].insert(a.key());
}

void TopoMap::store_action(const NodeName& prev, const NodeName& at,
                           const NodeName& next, Action action) {
  if (!has_edge_keys(prev.key(), at.key()) ||
      !has_edge_keys(at.key(), next.key())) {
    throw std::invalid_argument("cannot store an action for (" + prev.text() +
                                " -> " + at.text() + " -> " + next.text() +
                                "): edge missing from the map");
  }
  actions_[{at.key(), prev.key(), next.key()}] = action;
}

std::optional<MapConflict> TopoMap::add_path(const CanonicalPath& path) {
  require_valid(path);
  TopoMap tmp = *this;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    tmp.add_edge(path.waypoints[i - 1], path.waypoints[i]);
  }
  for (std::size_t i = 1; i + 1 < path.waypoints.size(); ++i) {
    const NodeName& prev = path.waypoints[i - 1];
    const NodeName& at = path.waypoints[i];
    const NodeName& next = path.waypoints[i + 1];
    const Action incoming = path.actions[i - 1];
    const auto known = tmp.infer_action(prev.key(), at.key(), next.key());
    if (known && *known != incoming) {
      return MapConflict{at, prev, at, next, *known, incoming};
    }
    tmp.store_action(prev, at, next, incoming);
  }
  *this = std::move(tmp);
  return std::nullopt;
}

bool TopoMap::has_node(std::string_view name) const {
  return nodes_.contains(fold_name(name));
}

std::optional<NodeName> TopoMap::find_node(std::string_view name) const {
  const auto it = nodes_.find(fold_name(name));
  if (it == nodes_.end()) {
    return std::nullopt;
  }
  return NodeName(it->second);
}

bool TopoMap::has_edge(std::string_view a, std::string_view b) const {
  return has_edge_keys(fold_name(a), fold_name(b));
}

bool TopoMap::has_edge_keys(const std::string& a, const std::string& b) const {
  return edges_.contains(edge_key(a, b));
}

std::optional<Action> TopoMap::stored_action(std::string_view prev,
                                             std::string_view at,
                                             std::string_view next) const {
  const auto it =
      actions_.find({fold_name(at), fold_name(prev), fold_name(next)});
  if (it == actions_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::map<std::string, int> TopoMap::relation_potentials(
    const std::string& at_key, const std::string& from) const {
  // relation graph over the neighbors of at_key: every stored action for a
  // triple (x, at, y) pins the quarter-turn offset between x and y
  std::map<std::string, std::vector<std::pair<std::string, int>>> rel;
  for (auto it = actions_.lower_bound({at_key, std::string(), std::string()});
       it != actions_.end() && std::get<0>(it->first) == at_key; ++it) {
    const std::string& x = std::get<1>(it->first);
    const std::string& y = std::get<2>(it->first);
    if (x == y) {
      continue;  // self relation fixes nothing between distinct neighbors
    }
    const int o = relation_offset(it->second);
    rel[x].push_back({y, o});
    rel[y].push_back({x, (4 - o) % 4});
  }
  std::map<std::string, int> potential;
  potential[from] = 0;
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    const std::string u = queue.front();
    queue.pop_front();
    const auto it = rel.find(u);
    if (it == rel.end()) {
      continue;
    }
    for (const auto& [v, o] : it->second) {
      if (potential.emplace(v, (potential[u] + o) % 4).second) {
        queue.push_back(v);
      }
    }
  }
  return potential;
}

std::optional<Action> TopoMap::infer_action(std::string_view prev,
                                            std::string_view at,
                                            std::string_view next) const {
  const std::string prev_key = fold_name(prev);
  const std::string at_key = fold_name(at);
  const std::string next_key = fold_name(next);
  if (!has_edge_keys(prev_key, at_key) || !has_edge_keys(at_key, next_key)) {
    throw std::invalid_argument(
        "cannot infer an action for (" + std::string(prev) + " -> " +
        std::string(at) + " -> " + std::string(next) +
        "): edge missing from the map");
  }
  if (prev_key == next_key) {
    return Action::TurnAround;  // returning along the same edge
  }
  if (const auto direct = stored_action(prev_key, at_key, next_key)) {
    return direct;
  }
  const auto potential = relation_potentials(at_key, prev_key);
  const auto it = potential.find(next_key);
  if (it == potential.end()) {
    return std::nullopt;
  }
  return action_from_offset(it->second);
}

std::vector<MapConflict> TopoMap::check_consistency() const {
  std::vector<MapConflict> conflicts;
  for (const auto& [at_key, display_name] : nodes_) {
    // collect this node's relations once
    std::vector<std::tuple<std::string, std::string, Action>> relations;
    for (auto it =
             actions_.lower_bound({at_key, std::string(), std::string()});
         it != actions_.end() && std::get<0>(it->first) == at_key; ++it) {
      relations.emplace_back(std::get<1>(it->first), std::get<2>(it->first),
                             it->second);
    }
    if (relations.empty()) {
      continue;
    }
    // propagate potentials component by component, then re-check every
    // relation against them; a disagreement is a broken cycle
    std::map<std::string, int> potential;
    for (const auto& [x, y, a] : relations) {
      if (!potential.contains(x)) {
        potential.merge(relation_potentials(at_key, x));
      }
      if (x == y) {
        if (a != Action::TurnAround) {
          conflicts.push_back(MapConflict{NodeName(display_name),
                                          display(x), display(at_key),
                                          display(y), a,
                                          Action::TurnAround});
        }
        continue;
      }
      const int implied = (potential.at(y) - potential.at(x) + 4) % 4;
      if (implied != relation_offset(a)) {
        conflicts.push_back(MapConflict{NodeName(display_name), display(x),
                                        display(at_key), display(y), a,
                                        action_from_offset(implied)});
      }
    }
  }
  return conflicts;
}

NodeName TopoMap::display(const std::string& key) const {
  const auto it = nodes_.find(key);
  return NodeName(it != nodes_.end() ? it->second : key);
}

std::vector<NodeName> TopoMap::nodes() const {
  std::vector<NodeName> out;
  out.reserve(nodes_.size());
  for (const auto& [key, name] : nodes_) {
    out.emplace_back(name);
  }
  return out;
}

std::vector<std::pair<NodeName, NodeName>> TopoMap::edges() const {
  std::vector<std::pair<NodeName, NodeName>> out;
  out.reserve(edges_.size());
  for (const auto& [a, b] : edges_) {
    out.emplace_back(display(a), display(b));
  }
  return out;
}

std::vector<TopoMap::StoredAction> TopoMap::stored_actions() const {
  std::vector<StoredAction> out;
  out.reserve(actions_.size());
  for (const auto& [key, action] : actions_) {
    out.push_back(StoredAction{display(std::get<1>(key)),
                               display(std::get<0>(key)),
                               display(std::get<2>(key)), action});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.prev, a.at, a.next) < std::tie(b.prev, b.at, b.next);
  });
  return out;
}

std::vector<NodeName> TopoMap::neighbors(std::string_view name) const {
  std::vector<NodeName> out;
  const auto it = adjacency_.find(fold_name(name));
  if (it == adjacency_.end()) {
    return out;
  }
  out.reserve(it->second.size());
  for (const auto& key : it->second) {
    out.push_back(display(key));
  }
  return out;
}

nlohmann::json map_to_json(const TopoMap& map) {
  nlohmann::json j;
  j["version"] = 1;
  auto nodes = nlohmann::json::array();
  for (const auto& n : map.nodes()) {
    nodes.push_back(n.text());
  }
  auto edges = nlohmann::json::array();
  for (const auto& [a, b] : map.edges()) {
    edges.push_back(nlohmann::json::array({a.text(), b.text()}));
  }
  auto actions = nlohmann::json::array();
  for (const auto& s : map.stored_actions()) {
    actions.push_back(nlohmann::json{{"prev", s.prev.text()},
                                     {"at", s.at.text()},
                                     {"next", s.next.text()},
                                     {"action",
                                      std::string(1, action_token(s.action))}});
  }
  j["nodes"] = std::move(nodes);
  j["edges"] = std::move(edges);
  j["actions"] = std::move(actions);
  return j;
}

TopoMap map_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) {
    throw std::runtime_error("map document lacks a version field");
  }
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported map version " +
                             j.at("version").dump());
  }
  TopoMap map;
  try {
    for (const auto& n : j.at("nodes")) {
      map.add_node(NodeName(n.get<std::string>()));
    }
    for (const auto& e : j.at("edges")) {
      const NodeName a{e.at(0).get<std::string>()};
      const NodeName b{e.at(1).get<std::string>()};
      if (!map.has_node(a.text()) || !map.has_node(b.text())) {
        throw std::runtime_error("edge references an unlisted node: " +
                                 e.dump());
      }
      map.add_edge(a, b);
    }
    for (const auto& s : j.at("actions")) {
      map.store_action(NodeName(s.at("prev").get<std::string>()),
                       NodeName(s.at("at").get<std::string>()),
                       NodeName(s.at("next").get<std::string>()),
                       action_from_token(s.at("action").get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed map document: ") +
                             e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed map document: ") +
                             e.what());
  }
  return map;
}

void save_map(const std::filesystem::path& file, const TopoMap& map) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  out << map_to_json(map).dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("failed writing " + file.string());
  }
}

TopoMap load_map(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse " + file.string() + ": " +
                             e.what());
  }
  return map_from_json(j);
}

}  // namespace textnav
