#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "textnav/router.hpp"
#include "textnav/topo_map.hpp"

namespace textnav {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// A ground-truth environment: named places with 2D coordinates, traversable
/// connections, and the designated start/destination candidates. Serves as
/// the geometric oracle that quantized actions are checked against.
class GeoEnvironment {
public:
  GeoEnvironment() = default;

  void set_id(std::string id) { id_ = std::move(id); }
  const std::string& id() const noexcept { return id_; }

  /// Throws std::invalid_argument on a duplicate name (case-insensitive)
  /// or a non-finite coordinate.
  void add_node(const NodeName& name, Point position);
  /// Throws std::invalid_argument on unknown endpoints, a self-loop, or a
  /// zero-length edge.
  void add_edge(std::string_view a, std::string_view b);
  /// Throws std::invalid_argument when any name is unknown, the list is
  /// shorter than two, or it repeats a node.
  void set_designated(const std::vector<std::string>& names);

  bool has_node(std::string_view name) const;
  std::optional<NodeName> find_node(std::string_view name) const;
  bool has_edge(std::string_view a, std::string_view b) const;
  Point position(std::string_view name) const;  // throws on unknown names

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  /// Sorted by folded key.
  std::vector<NodeName> node_names() const;
  std::vector<std::pair<NodeName, NodeName>> edges() const;
  std::vector<NodeName> neighbors(std::string_view name) const;
  const std::vector<NodeName>& designated() const noexcept {
    return designated_;
  }

  bool connected() const;

  /// Everything wrong with the environment (disconnected, too few
  /// designated nodes, ...); empty means usable.
  std::vector<std::string> validate() const;

private:
  std::string id_;
  std::map<std::string, std::pair<std::string, Point>> nodes_;  // key -> (display, pos)
  std::set<std::pair<std::string, std::string>> edges_;         // key pairs
  std::map<std::string, std::set<std::string>> adjacency_;
  std::vector<NodeName> designated_;

  const std::pair<std::string, Point>& node_at(std::string_view name) const;
};

/// Signed heading change at `at` when arriving from `prev` and leaving
/// toward `next`: the deviation of the outgoing direction from the
/// continuation of travel, normalized to (-pi, pi], positive leftward.
/// Throws std::invalid_argument when either edge is missing.
double deviation_angle(const GeoEnvironment& env, std::string_view prev,
                       std::string_view at, std::string_view next);

/// The geometric oracle: quantizes deviation_angle with the given
/// threshold. Returning along the same edge always turns around.
Action ground_truth_action(const GeoEnvironment& env, std::string_view prev,
                           std::string_view at, std::string_view next,
                           AngleThreshold theta = AngleThreshold{});

/// Unit-weight graph distance between two nodes; nullopt when unreachable.
/// Throws std::invalid_argument on unknown names.
std::optional<int> graph_distance(const GeoEnvironment& env,
                                  std::string_view from, std::string_view to);

/// A map holding the whole environment: every node, every edge, and the
/// oracle action for every ordered neighbor triple. Route answers over it
/// are the environment's ground truth.
TopoMap full_map(const GeoEnvironment& env,
                 AngleThreshold theta = AngleThreshold{});

/// Deterministically generates a connected environment: nodes on a
/// unit-spaced grid with positional jitter small enough that no triple's
/// deviation angle comes near a quantization boundary (verified by an
/// exhaustive scan before returning). Node names are n1..nK; designated
/// nodes are drawn at random.
GeoEnvironment generate_environment(std::uint64_t seed, int node_count,
                                    int designated_count = 5,
                                    AngleThreshold theta = AngleThreshold{});

/// The five-node walkthrough environment used across tests and docs;
/// its designated list covers all five nodes.
GeoEnvironment toy_environment();

/// One evaluation record: a start/goal query, its ground-truth route, and
/// the instruction text describing that route.
struct DatasetItem {
  NodeName start;
  NodeName goal;
  CanonicalPath truth;
  std::string instruction;
};

struct PathDataset {
  std::string environment_id;
  std::vector<DatasetItem> items;
};

/// Samples the evaluation protocol's 10 routes between designated nodes.
/// Ground truths are the deterministic shortest routes over the full map;
/// instructions are their generated texts. The chosen set additionally
/// guarantees held-out coverage: every item's query is answerable, at the
/// true shortest length, from a map built of the other nine routes alone.
/// Throws std::runtime_error when the environment cannot satisfy that
/// guarantee within a bounded number of reseedings.
PathDataset sample_dataset(const GeoEnvironment& env, std::uint64_t seed,
                           AngleThreshold theta = AngleThreshold{});

/// Environment file shape:
///   {"nodes": {"n1": [x, y], ...}, "edges": [["n1","n2"], ...],
///    "designated": [...]}
nlohmann::json environment_to_json(const GeoEnvironment& env);
GeoEnvironment environment_from_json(const nlohmann::json& j,
                                     std::string id = {});
void save_environment(const std::filesystem::path& file,
                      const GeoEnvironment& env);
GeoEnvironment load_environment(const std::filesystem::path& file);

nlohmann::json dataset_to_json(const PathDataset& dataset);
PathDataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const std::filesystem::path& file,
                  const PathDataset& dataset);
PathDataset load_dataset(const std::filesystem::path& file);

}  // namespace textnav
