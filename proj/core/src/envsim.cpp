#include "textnav/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>

#include "textnav/instruction.hpp"
#include "textnav/rng.hpp"

namespace textnav {

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

std::pair<std::string, std::string> key_pair(const std::string& a,
                                             const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

// ---------------------------------------------------------------------------
// GeoEnvironment
// ---------------------------------------------------------------------------

void GeoEnvironment::add_node(const NodeName& name, Point position) {
  if (!std::isfinite(position.x) || !std::isfinite(position.y)) {
    throw std::invalid_argument("node \"" + name.text() +
                                "\" has a non-finite coordinate");
  }
  if (!nodes_.emplace(name.key(), std::make_pair(name.text(), position))
           .second) {
    throw std::invalid_argument("duplicate node name \"" + name.text() +
                                "\"");
  }
}

void GeoEnvironment::add_edge(std::string_view a, std::string_view b) {
  const auto& [name_a, pos_a] = node_at(a);
  const auto& [name_b, pos_b] = node_at(b);
  const std::string key_a = fold_name(a);
  const std::string key_b = fold_name(b);
  if (key_a == key_b) {
    throw std::invalid_argument("self-loop edge at \"" + name_a + "\"");
  }
  const double dx = pos_a.x - pos_b.x;
  const double dy = pos_a.y - pos_b.y;
  if (dx * dx + dy * dy == 0.0) {
    throw std::invalid_argument("zero-length edge between \"" + name_a +
                                "\" and \"" + name_b + "\"");
  }
  edges_.insert(key_pair(key_a, key_b));
  adjacency_[key_a].insert(key_b);
  adjacency_[key_b].insert(key_a);
}

void GeoEnvironment::set_designated(const std::vector<std::string>& names) {
  if (names.size() < 2) {
    throw std::invalid_argument("need at least two designated nodes");
  }
  std::vector<NodeName> resolved;
  std::set<std::string> seen;
  for (const auto& name : names) {
    const auto found = find_node(name);
    if (!found) {
      throw std::invalid_argument("designated node \"" + name +
                                  "\" is not in the environment");
    }
    if (!seen.insert(found->key()).second) {
      throw std::invalid_argument("designated node \"" + name +
                                  "\" repeats");
    }
    resolved.push_back(*found);
  }
  designated_ = std::move(resolved);
}

bool GeoEnvironment::has_node(std::string_view name) const {
  return nodes_.contains(fold_name(name));
}

std::optional<NodeName> GeoEnvironment::find_node(std::string_view name) const {
  const auto it = nodes_.find(fold_name(name));
  if (it == nodes_.end()) {
    return std::nullopt;
  }
  return NodeName(it->second.first);
}

bool GeoEnvironment::has_edge(std::string_view a, std::string_view b) const {
  return edges_.contains(key_pair(fold_name(a), fold_name(b)));
}

const std::pair<std::string, Point>& GeoEnvironment::node_at(
    std::string_view name) const {
  const auto it = nodes_.find(fold_name(name));
  if (it == nodes_.end()) {
    throw std::invalid_argument("unknown node \"" + std::string(name) + "\"");
  }
  return it->second;
}

Point GeoEnvironment::position(std::string_view name) const {
  return node_at(name).second;
}

std::vector<NodeName> GeoEnvironment::node_names() const {
  std::vector<NodeName> out;
  out.reserve(nodes_.size());
  for (const auto& [key, node] : nodes_) {
    out.emplace_back(node.first);
  }
  return out;
}

std::vector<std::pair<NodeName, NodeName>> GeoEnvironment::edges() const {
  std::vector<std::pair<NodeName, NodeName>> out;
  out.reserve(edges_.size());
  for (const auto& [a, b] : edges_) {
    out.emplace_back(NodeName(nodes_.at(a).first), NodeName(nodes_.at(b).first));
  }
  return out;
}

std::vector<NodeName> GeoEnvironment::neighbors(std::string_view name) const {
  std::vector<NodeName> out;
  const auto it = adjacency_.find(fold_name(name));
  if (it == adjacency_.end()) {
    return out;
  }
  for (const auto& key : it->second) {
    out.emplace_back(nodes_.at(key).first);
  }
  return out;
}

bool GeoEnvironment::connected() const {
  if (nodes_.empty()) {
    return true;
  }
  std::set<std::string> seen{nodes_.begin()->first};
  std::deque<std::string> queue{nodes_.begin()->first};
  while (!queue.empty()) {
    const std::string u = queue.front();
    queue.pop_front();
    const auto it = adjacency_.find(u);
    if (it == adjacency_.end()) {
      continue;
    }
    for (const auto& v : it->second) {
      if (seen.insert(v).second) {
        queue.push_back(v);
      }
    }
  }
  return seen.size() == nodes_.size();
}

std::vector<std::string> GeoEnvironment::validate() const {
  std::vector<std::string> problems;
  if (nodes_.size() < 2) {
    problems.push_back("environment needs at least two nodes");
  }
  if (!connected()) {
    problems.push_back("environment graph is not connected");
  }
  if (designated_.size() < 2) {
    problems.push_back("environment needs at least two designated nodes");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// geometric oracle
// ---------------------------------------------------------------------------

double deviation_angle(const GeoEnvironment& env, std::string_view prev,
                       std::string_view at, std::string_view next) {
  if (!env.has_edge(prev, at) || !env.has_edge(at, next)) {
    throw std::invalid_argument("cannot measure the turn for (" +
                                std::string(prev) + " -> " + std::string(at) +
                                " -> " + std::string(next) +
                                "): edge missing from the environment");
  }
  const Point p = env.position(prev);
  const Point a = env.position(at);
  const Point n = env.position(next);
  const double bearing_in = std::atan2(a.y - p.y, a.x - p.x);
  const double bearing_out = std::atan2(n.y - a.y, n.x - a.x);
  return normalize_angle(bearing_out - bearing_in);
}

Action ground_truth_action(const GeoEnvironment& env, std::string_view prev,
                           std::string_view at, std::string_view next,
                           AngleThreshold theta) {
  return from_angle(deviation_angle(env, prev, at, next), theta);
}

std::optional<int> graph_distance(const GeoEnvironment& env,
                                  std::string_view from, std::string_view to) {
  const auto start = env.find_node(from);
  const auto goal = env.find_node(to);
  if (!start || !goal) {
    throw std::invalid_argument("unknown node in distance query");
  }
  std::map<std::string, int> dist{{start->key(), 0}};
  std::deque<NodeName> queue{*start};
  while (!queue.empty()) {
    const NodeName u = queue.front();
    queue.pop_front();
    if (u == *goal) {
      return dist.at(u.key());
    }
    for (const NodeName& v : env.neighbors(u.key())) {
      if (dist.emplace(v.key(), dist.at(u.key()) + 1).second) {
        queue.push_back(v);
      }
    }
  }
  return std::nullopt;
}

TopoMap full_map(const GeoEnvironment& env, AngleThreshold theta) {
  TopoMap map;
  for (const NodeName& n : env.node_names()) {
    map.add_node(n);
  }
  for (const auto& [a, b] : env.edges()) {
    map.add_edge(a, b);
  }
  for (const NodeName& at : env.node_names()) {
    const auto around = env.neighbors(at.key());
    for (const NodeName& prev : around) {
      for (const NodeName& next : around) {
        if (prev == next) {
          continue;  // returning along an edge is always derivable
        }
        map.store_action(prev, at, next,
                         ground_truth_action(env, prev.key(), at.key(),
                                             next.key(), theta));
      }
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

namespace {

// maximum per-axis jitter; keeps every edge within ~11 degrees of an axis,
// which leaves > 20 degrees of margin to every quantization boundary at
// the default threshold
constexpr double kJitter = 0.08;

double boundary_margin(double angle, AngleThreshold theta) {
  const double t = theta.radians();
  double margin = std::numeric_limits<double>::infinity();
  for (double boundary : {t, -t, kPi - t, -(kPi - t)}) {
    margin = std::min(margin,
                      std::fabs(std::remainder(angle - boundary, 2.0 * kPi)));
  }
  return margin;
}

// the smallest boundary margin over every ordered neighbor triple
double scan_margin(const GeoEnvironment& env, AngleThreshold theta) {
  double worst = std::numeric_limits<double>::infinity();
  for (const NodeName& at : env.node_names()) {
    const auto around = env.neighbors(at.key());
    for (const NodeName& prev : around) {
      for (const NodeName& next : around) {
        if (prev == next) {
          continue;  // exact reversal sits at pi, never near a boundary
        }
        const double angle =
            deviation_angle(env, prev.key(), at.key(), next.key());
        worst = std::min(worst, boundary_margin(angle, theta));
      }
    }
  }
  return worst;
}

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) {
      parent[i] = i;
    }
  }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) {
      return false;
    }
    parent[a] = b;
    return true;
  }
};

GeoEnvironment generate_attempt(std::uint64_t seed, int node_count,
                                int designated_count) {
  DeterministicRng rng(seed);
  const int cols =
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(node_count))));

  GeoEnvironment env;
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) {
    const int row = i / cols;
    const int col = i % cols;
    const std::string name = "n" + std::to_string(i + 1);
    env.add_node(NodeName(name),
                 Point{static_cast<double>(col) +
                           rng.range(-kJitter, kJitter),
                       static_cast<double>(row) +
                           rng.range(-kJitter, kJitter)});
    names.push_back(name);
  }

  // candidate edges join 4-neighborhood grid cells
  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < node_count; ++i) {
    const int col = i % cols;
    if (col + 1 < cols && i + 1 < node_count) {
      candidates.emplace_back(i, i + 1);
    }
    if (i + cols < node_count) {
      candidates.emplace_back(i, i + cols);
    }
  }
  rng.shuffle(candidates);

  // spanning tree first, then a sprinkle of extra edges
  UnionFind components(static_cast<std::size_t>(node_count));
  for (const auto& [a, b] : candidates) {
    if (components.unite(static_cast<std::size_t>(a),
                         static_cast<std::size_t>(b))) {
      env.add_edge(names[static_cast<std::size_t>(a)],
                   names[static_cast<std::size_t>(b)]);
    } else if (rng.chance(0.35)) {
      env.add_edge(names[static_cast<std::size_t>(a)],
                   names[static_cast<std::size_t>(b)]);
    }
  }

  std::vector<std::string> pool = names;
  rng.shuffle(pool);
  std::vector<std::string> designated(pool.begin(),
                                      pool.begin() + designated_count);
  std::sort(designated.begin(), designated.end());
  env.set_designated(designated);
  return env;
}

}  // namespace

GeoEnvironment generate_environment(std::uint64_t seed, int node_count,
                                    int designated_count,
                                    AngleThreshold theta) {
  if (designated_count < 2) {
    throw std::invalid_argument("need at least two designated nodes");
  }
  if (node_count < designated_count) {
    throw std::invalid_argument(
        "node count must cover the designated count: " +
        std::to_string(node_count) + " < " + std::to_string(designated_count));
  }
  constexpr int kMaxAttempts = 32;
  constexpr double kRequiredMargin = 1e-6;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    GeoEnvironment env = generate_attempt(
        DeterministicRng::derive_seed(seed, static_cast<std::uint64_t>(attempt)),
        node_count, designated_count);
    if (scan_margin(env, theta) > kRequiredMargin) {
      env.set_id("env-" + std::to_string(seed));
      return env;
    }
  }
  throw std::runtime_error(
      "could not generate an environment away from quantization boundaries "
      "for seed " +
      std::to_string(seed));
}

GeoEnvironment toy_environment() {
  GeoEnvironment env;
  env.set_id("toy");
  env.add_node(NodeName("n1"), Point{0.0, 0.0});
  env.add_node(NodeName("n2"), Point{0.0, 1.0});
  env.add_node(NodeName("n3"), Point{1.0, 1.0});
  env.add_node(NodeName("n4"), Point{0.0, 2.0});
  env.add_node(NodeName("n5"), Point{-1.0, 2.0});
  env.add_edge("n1", "n2");
  env.add_edge("n2", "n3");
  env.add_edge("n2", "n4");
  env.add_edge("n4", "n5");
  env.set_designated({"n1", "n2", "n3", "n4", "n5"});
  return env;
}

// ---------------------------------------------------------------------------
// dataset sampling
// ---------------------------------------------------------------------------

namespace {

CanonicalPath ground_truth_route(const TopoMap& full, const NodeName& start,
                                 const NodeName& goal) {
  RouteResult result = find_route(full, RouteQuery{start, goal});
  if (const auto* path = std::get_if<CanonicalPath>(&result)) {
    return *path;
  }
  throw std::runtime_error("no ground-truth route from \"" + start.text() +
                           "\" to \"" + goal.text() + "\": " +
                           std::get<RouteFailure>(result).describe());
}

// every item must stay answerable, at the true shortest length, from the
// other nine routes alone
bool holds_coverage(const std::vector<DatasetItem>& items) {
  for (std::size_t held_out = 0; held_out < items.size(); ++held_out) {
    TopoMap map;
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (j == held_out) {
        continue;
      }
      if (map.add_path(items[j].truth)) {
        return false;  // oracle routes can never conflict
      }
    }
    const auto& item = items[held_out];
    RouteResult result =
        find_route(map, RouteQuery{item.start, item.goal});
    const auto* path = std::get_if<CanonicalPath>(&result);
    if (!path || path->waypoints.size() != item.truth.waypoints.size()) {
      return false;
    }
  }
  return true;
}

}  // namespace

PathDataset sample_dataset(const GeoEnvironment& env, std::uint64_t seed,
                           AngleThreshold theta) {
  const auto problems = env.validate();
  if (!problems.empty()) {
    throw std::invalid_argument("environment is not usable: " +
                                problems.front());
  }
  constexpr std::size_t kItemCount = 10;
  const auto& designated = env.designated();
  std::vector<std::pair<NodeName, NodeName>> pairs;
  for (const NodeName& a : designated) {
    for (const NodeName& b : designated) {
      if (!(a == b)) {
        pairs.emplace_back(a, b);
      }
    }
  }
  if (pairs.size() < kItemCount) {
    throw std::invalid_argument(
        "environment offers only " + std::to_string(pairs.size()) +
        " designated start/goal pairs, need " + std::to_string(kItemCount));
  }

  const TopoMap full = full_map(env, theta);

  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    DeterministicRng rng(
        DeterministicRng::derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    auto shuffled = pairs;
    rng.shuffle(shuffled);

    PathDataset dataset;
    dataset.environment_id = env.id();
    for (std::size_t i = 0; i < kItemCount; ++i) {
      const auto& [start, goal] = shuffled[i];
      CanonicalPath truth = ground_truth_route(full, start, goal);
      std::string instruction = generate_instruction(truth);
      dataset.items.push_back(
          DatasetItem{start, goal, std::move(truth), std::move(instruction)});
    }
    if (holds_coverage(dataset.items)) {
      return dataset;
    }
  }
  throw std::runtime_error(
      "environment \"" + env.id() + "\" cannot supply " +
      std::to_string(kItemCount) +
      " routes with held-out coverage: some query is not answerable from "
      "the remaining nine routes at the shortest length");
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

nlohmann::json environment_to_json(const GeoEnvironment& env) {
  nlohmann::json nodes = nlohmann::json::object();
  for (const NodeName& n : env.node_names()) {
    const Point p = env.position(n.key());
    nodes[n.text()] = nlohmann::json::array({p.x, p.y});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : env.edges()) {
    edges.push_back(nlohmann::json::array({a.text(), b.text()}));
  }
  nlohmann::json designated = nlohmann::json::array();
  for (const NodeName& d : env.designated()) {
    designated.push_back(d.text());
  }
  return nlohmann::json{{"nodes", std::move(nodes)},
                        {"edges", std::move(edges)},
                        {"designated", std::move(designated)}};
}

GeoEnvironment environment_from_json(const nlohmann::json& j, std::string id) {
  GeoEnvironment env;
  env.set_id(std::move(id));
  try {
    for (const auto& [name, position] : j.at("nodes").items()) {
      env.add_node(NodeName(name), Point{position.at(0).get<double>(),
                                         position.at(1).get<double>()});
    }
    for (const auto& edge : j.at("edges")) {
      env.add_edge(edge.at(0).get<std::string>(),
                   edge.at(1).get<std::string>());
    }
    std::vector<std::string> designated;
    for (const auto& d : j.at("designated")) {
      designated.push_back(d.get<std::string>());
    }
    env.set_designated(designated);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed environment document: ") +
                             e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed environment document: ") +
                             e.what());
  }
  const auto problems = env.validate();
  if (!problems.empty()) {
    throw std::runtime_error("environment document is unusable: " +
                             problems.front());
  }
  return env;
}

void save_environment(const std::filesystem::path& file,
                      const GeoEnvironment& env) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  out << environment_to_json(env).dump(2) << '\n';
}

GeoEnvironment load_environment(const std::filesystem::path& file) {
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
  return environment_from_json(j, file.stem().string());
}

nlohmann::json dataset_to_json(const PathDataset& dataset) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : dataset.items) {
    nlohmann::json truth;
    to_json(truth, item.truth);
    items.push_back(nlohmann::json{{"start", item.start.text()},
                                   {"goal", item.goal.text()},
                                   {"truth", std::move(truth)},
                                   {"instruction", item.instruction}});
  }
  return nlohmann::json{{"environment", dataset.environment_id},
                        {"items", std::move(items)}};
}

PathDataset dataset_from_json(const nlohmann::json& j) {
  PathDataset dataset;
  try {
    dataset.environment_id = j.at("environment").get<std::string>();
    for (const auto& item : j.at("items")) {
      CanonicalPath truth;
      from_json(item.at("truth"), truth);
      dataset.items.push_back(
          DatasetItem{NodeName(item.at("start").get<std::string>()),
                      NodeName(item.at("goal").get<std::string>()), truth,
                      item.at("instruction").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed dataset document: ") +
                             e.what());
  }
  return dataset;
}

void save_dataset(const std::filesystem::path& file,
                  const PathDataset& dataset) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  out << dataset_to_json(dataset).dump(2) << '\n';
}

PathDataset load_dataset(const std::filesystem::path& file) {
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
  return dataset_from_json(j);
}

}  // namespace textnav
