#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "textnav/canonical.hpp"

namespace textnav {

/// A contradiction between an action already implied by the map and an
/// incoming (or stored) one for the same (prev, at, next) triple.
struct MapConflict {
  NodeName node;   ///< the waypoint where the contradiction lives (== at)
  NodeName prev;
  NodeName at;
  NodeName next;
  Action stored;   ///< what the map holds or implies
  Action incoming; ///< what the new input (or another derivation) claims

  std::string describe() const;
};

/// The explicit map: an undirected graph of named places plus a directional
/// action store keyed by (prev, at, next) waypoint triples.
///
/// Only explicitly instructed actions are stored; everything else is derived
/// on demand by infer_action(), which propagates quarter-turn constraints
/// between the incident edges of a node. Node identity is case-insensitive
/// and the first-seen spelling of each name is kept for output.
class TopoMap {
public:
  struct StoredAction {
    NodeName prev;
    NodeName at;
    NodeName next;
    Action action;
  };

  TopoMap() = default;

  /// Inserts a node; a re-insert under a differently-cased spelling is a
  /// no-op. Returns the stored spelling.
  NodeName add_node(const NodeName& name);

  /// Inserts an undirected edge, adding missing endpoints. Throws
  /// std::invalid_argument on a self-loop.
  void add_edge(const NodeName& a, const NodeName& b);

  /// Records an action for the ordered triple. Both edges must already
  /// exist (std::invalid_argument otherwise). No algebraic consistency
  /// check happens here; see add_path() for conflict-checked ingestion
  /// and check_consistency() for validation.
  void store_action(const NodeName& prev, const NodeName& at,
                    const NodeName& next, Action action);

  /// Merges a whole instruction into the map: waypoints become nodes,
  /// consecutive pairs become edges, and each interior action is stored.
  /// When any action contradicts what the map already stores or can
  /// derive, the conflict is returned and the map is left untouched.
  /// Throws std::invalid_argument when the path itself is invalid.
  std::optional<MapConflict> add_path(const CanonicalPath& path);

  bool has_node(std::string_view name) const;
  /// Resolves a label to the stored spelling, case-insensitively.
  std::optional<NodeName> find_node(std::string_view name) const;
  bool has_edge(std::string_view a, std::string_view b) const;

  /// Exact-key lookup in the action store; never infers.
  std::optional<Action> stored_action(std::string_view prev,
                                      std::string_view at,
                                      std::string_view next) const;

  /// The action for (prev, at, next), either stored or derived by chaining
  /// known actions at `at` through shared neighbors (pivot composition,
  /// applied transitively). Returns nullopt when the available relations
  /// do not connect prev to next. Going back along the same edge is always
  /// a turn-around. Throws std::invalid_argument when either edge is
  /// missing.
  std::optional<Action> infer_action(std::string_view prev,
                                     std::string_view at,
                                     std::string_view next) const;

  /// Validates every per-node constraint cycle. Returns one conflict per
  /// stored relation that disagrees with the propagated potentials; empty
  /// means the map is consistent.
  std::vector<MapConflict> check_consistency() const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t action_count() const noexcept { return actions_.size(); }

  /// Nodes sorted by folded key.
  std::vector<NodeName> nodes() const;
  /// Edges with lexicographic inner and outer order.
  std::vector<std::pair<NodeName, NodeName>> edges() const;
  /// Stored actions sorted by (prev, at, next).
  std::vector<StoredAction> stored_actions() const;
  /// Neighbor names of a node, sorted by folded key; empty for unknown
  /// nodes.
  std::vector<NodeName> neighbors(std::string_view name) const;

  friend bool operator==(const TopoMap&, const TopoMap&) = default;

private:
  // keys are folded names; values remember the display spelling
  std::map<std::string, std::string> nodes_;
  std::set<std::pair<std::string, std::string>> edges_;  // key pairs, min first
  std::map<std::string, std::set<std::string>> adjacency_;
  // keyed (at, prev, next) so one node's relations are contiguous
  std::map<std::tuple<std::string, std::string, std::string>, Action> actions_;

  NodeName display(const std::string& key) const;
  bool has_edge_keys(const std::string& a, const std::string& b) const;
  // quarter-turn potentials of every relation-reachable neighbor, relative
  // to `from`; keys are neighbor node keys
  std::map<std::string, int> relation_potentials(const std::string& at_key,
                                                 const std::string& from) const;
};

/// Versioned map file shape:
///   {"version": 1, "nodes": [...], "edges": [[a, b], ...],
///    "actions": [{"prev":..., "at":..., "next":..., "action":"R"}, ...]}
/// All three lists are sorted for byte-stable output.
nlohmann::json map_to_json(const TopoMap& map);

/// Rebuilds a map from its file shape. Throws std::runtime_error on an
/// unsupported version or a structurally broken document (unknown nodes in
/// edges, action triples without their edges). Algebraic consistency is
/// not re-checked here; run check_consistency() for that.
TopoMap map_from_json(const nlohmann::json& j);

void save_map(const std::filesystem::path& file, const TopoMap& map);
TopoMap load_map(const std::filesystem::path& file);

}  // namespace textnav
