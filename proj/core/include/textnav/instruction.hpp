#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "textnav/canonical.hpp"

namespace textnav {

/// A rejected instruction, pointing at the first offending byte.
struct ParseError {
  std::size_t offset;
  std::string message;
};

using ParseResult = std::variant<CanonicalPath, ParseError>;

/// Parses one instruction written in the controlled route grammar.
///
/// An instruction opens with a start clause ("Depart from A to B",
/// "Begin in ...", "Commence on ...", "Start at ...") and continues with
/// movement clauses ("Then, turn right and proceed to C.",
/// "Continue on to D", "swing left there and towards E", ...). Keywords
/// are case-insensitive; place names are either double-quoted or bare
/// token runs ending at the next keyword or punctuation mark, optionally
/// preceded by "the". A waypoint's action is the turn named by the
/// movement clause that leaves it (forward when the clause has no turn
/// phrase).
ParseResult parse_instruction(std::string_view text);

/// Renders a valid path as instruction text:
///   "Depart from n5 to n4. Then, turn right and proceed to n2. ..."
/// Names that would collide with grammar keywords or punctuation are
/// double-quoted, so the output always parses back to `path` exactly.
/// Throws std::invalid_argument on an invalid path or on a name that
/// cannot be expressed (it contains a double quote and needs quoting).
std::string generate_instruction(const CanonicalPath& path);

// ---------------------------------------------------------------------------
// extraction pipeline (waypoints + turn points via an answering backend)
// ---------------------------------------------------------------------------

/// Answer of a turn-direction check.
enum class TurnSide { Left, Right };

/// What one extractor call returns: every waypoint in order, plus the
/// waypoints it marked as turn points for its direction.
struct Extraction {
  std::vector<NodeName> waypoints;
  std::set<NodeName> turn_points;
};

/// Signalled by a backend that cannot answer (transport trouble, malformed
/// responses, out-of-vocabulary answers, ...).
class BackendError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The three calls the extraction pipeline needs. Implementations answer
/// each call or throw BackendError; they must not keep state the pipeline
/// can observe across calls.
class ExtractorBackend {
public:
  virtual ~ExtractorBackend() = default;

  virtual Extraction extract_left(const std::string& instruction) = 0;
  virtual Extraction extract_right(const std::string& instruction) = 0;
  virtual TurnSide check_turn(const std::string& instruction,
                              const NodeName& waypoint) = 0;
};

/// Upper bound on paired extractor invocations per instruction.
class RetryBudget {
public:
  RetryBudget() : max_attempts_(3) {}
  explicit RetryBudget(int max_attempts) : max_attempts_(max_attempts) {
    if (max_attempts < 1) {
      throw std::invalid_argument("retry budget must be at least 1");
    }
  }

  int max_attempts() const noexcept { return max_attempts_; }

private:
  int max_attempts_;
};

/// Everything the pipeline learned on the way to its answer.
struct ExtractionRecord {
  std::vector<NodeName> waypoints_left;
  std::vector<NodeName> waypoints_right;
  std::set<NodeName> left_turns;
  std::set<NodeName> right_turns;
  int attempts = 0;
};

struct ExtractionSuccess {
  CanonicalPath path;
  ExtractionRecord record;
};

struct ExtractionError {
  enum class Kind {
    Disagreement,    ///< waypoint lists never agreed within the budget
    BackendFailure,  ///< a backend call failed
    InvalidPath,     ///< agreed waypoints do not form a valid path
  };

  Kind kind;
  int attempts = 0;
  std::string message;
};

using ExtractionResult = std::variant<ExtractionSuccess, ExtractionError>;

/// Runs the two-extractor pipeline: query left and right turn points,
/// retry while the waypoint lists disagree (up to the budget), take the
/// right extractor's waypoints, then assign each interior waypoint an
/// action — check_turn when both extractors marked it, the respective
/// turn when one did, forward when neither did.
ExtractionResult extract_canonical(const std::string& instruction,
                                   ExtractorBackend& backend,
                                   const RetryBudget& budget = RetryBudget{});

/// The deterministic backend: answers every call from parse_instruction
/// on the controlled grammar. Also the reference oracle when testing
/// other backends.
class GrammarBackend : public ExtractorBackend {
public:
  Extraction extract_left(const std::string& instruction) override;
  Extraction extract_right(const std::string& instruction) override;
  TurnSide check_turn(const std::string& instruction,
                      const NodeName& waypoint) override;

private:
  Extraction extract_side(const std::string& instruction, Action side);
  CanonicalPath parse_or_throw(const std::string& instruction);
};

}  // namespace textnav
