#pragma once

#include <compare>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "textnav/action.hpp"

namespace textnav {

/// A place label. Display text keeps the original (trimmed) casing while
/// comparison and ordering fold case and collapse internal whitespace, so
/// "Living room" and "living  ROOM" name the same node.
class NodeName {
public:
  /// Throws std::invalid_argument when the text is empty after trimming
  /// or contains a newline.
  explicit NodeName(std::string_view text);

  const std::string& text() const noexcept { return text_; }
  /// Folded form used for equality, ordering and map keys.
  const std::string& key() const noexcept { return key_; }

  friend bool operator==(const NodeName& a, const NodeName& b) noexcept {
    return a.key_ == b.key_;
  }
  friend std::strong_ordering operator<=>(const NodeName& a,
                                          const NodeName& b) noexcept {
    return a.key_ <=> b.key_;
  }

private:
  std::string text_;
  std::string key_;
};

/// Folds a raw label the same way NodeName does (trim, collapse internal
/// whitespace, lowercase ASCII). Useful for lookups without constructing
/// a NodeName.
std::string fold_name(std::string_view text);

/// The canonical form of a route: ordered waypoints plus one action per
/// interior waypoint. actions[i] happens at waypoints[i + 1]; the start
/// and the goal carry no action.
struct CanonicalPath {
  std::vector<NodeName> waypoints;
  std::vector<Action> actions;

  friend bool operator==(const CanonicalPath&, const CanonicalPath&) = default;
};

/// One broken invariant found by validate().
struct PathViolation {
  std::string message;
};

/// Returns every invariant violation; the path is valid iff the result is
/// empty. Checks: at least two waypoints, no two consecutive equal
/// waypoints, action count == waypoint count - 2.
std::vector<PathViolation> validate(const CanonicalPath& path);

/// True iff validate(path) reports nothing.
bool is_valid(const CanonicalPath& path);

/// Throws std::invalid_argument describing every violation when the path
/// is invalid.
void require_valid(const CanonicalPath& path);

/// The same route walked backwards: waypoints reversed, actions reversed
/// with each action replaced by its inverse. Involution on valid paths.
/// Throws std::invalid_argument on invalid input.
CanonicalPath reverse(const CanonicalPath& path);

/// JSON interchange shape used by every CLI subcommand:
///   {"waypoints": ["n1", ...], "actions": ["F"|"L"|"R"|"T", ...]}
void to_json(nlohmann::json& j, const CanonicalPath& path);
void from_json(const nlohmann::json& j, CanonicalPath& path);

/// Compact rendering for diagnostics, e.g. [n5, n4, n2, n3] / [R, L].
std::string describe(const CanonicalPath& path);

}  // namespace textnav
