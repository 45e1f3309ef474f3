#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>

#include "textnav/topo_map.hpp"

namespace textnav {

/// A start/goal pair. Start and goal must differ (case-insensitively);
/// find_route throws std::invalid_argument otherwise.
struct RouteQuery {
  NodeName start;
  NodeName goal;
};

/// Why a query produced no route.
struct RouteFailure {
  enum class Kind {
    UnknownNode,
    NoPath,
    InsufficientInformation,
  };

  Kind kind;
  /// The unresolvable name (UnknownNode only).
  std::optional<NodeName> node;
  /// The first non-derivable triple on the lexicographically first
  /// shortest path (InsufficientInformation only).
  std::optional<std::array<NodeName, 3>> triple;

  std::string describe() const;
};

using RouteResult = std::variant<CanonicalPath, RouteFailure>;

/// Answers a query on a consistent map: finds a path with the minimal edge
/// count whose interior actions are all derivable, and fills the actions in.
///
/// Minimal-length candidates are tried in lexicographic order of their
/// waypoint sequences and the first fully derivable one wins, so results
/// are deterministic and never longer than the true graph distance.
RouteResult find_route(const TopoMap& map, const RouteQuery& query);

inline bool route_succeeded(const RouteResult& r) {
  return std::holds_alternative<CanonicalPath>(r);
}

}  // namespace textnav
