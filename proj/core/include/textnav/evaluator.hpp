#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "textnav/envsim.hpp"
#include "textnav/llm_client.hpp"

namespace textnav {

enum class EvalTask { Reverse, Combined };
enum class EvalMethod { Explicit, Implicit };

std::string_view eval_task_name(EvalTask task) noexcept;
std::string_view eval_method_name(EvalMethod method) noexcept;

/// Per-item verdicts. "Shortest" implies reachable; reverse-path items
/// either match exactly (scored Shortest) or fail.
enum class ItemOutcome {
  SucceededShortest,
  SucceededReachableOnly,
  FailedParse,         ///< the item's text never became a canonical path
  FailedInsufficient,  ///< the map lacked the information to answer
  FailedWrong,         ///< an answer arrived but is not a correct route
};

std::string_view item_outcome_name(ItemOutcome outcome) noexcept;

struct EvalItem {
  std::string environment_id;
  int index = 0;
  std::string start;
  std::string goal;
  ItemOutcome outcome = ItemOutcome::FailedParse;
  std::string detail;
  std::optional<CanonicalPath> output;
};

struct EvalTotals {
  int attempted = 0;
  int succeeded_reachable = 0;
  int succeeded_shortest = 0;
  int failed_parse = 0;
  int failed_insufficient = 0;
  int failed_wrong = 0;
};

struct EvalReport {
  EvalTask task = EvalTask::Reverse;
  EvalMethod method = EvalMethod::Explicit;
  std::string backend_id;
  EvalTotals totals;
  std::vector<EvalItem> items;

  void add(EvalItem item);
  /// Folds another report over the same task/method/backend into this one
  /// (multi-environment runs). Throws std::invalid_argument on mismatch.
  void merge(const EvalReport& other);

  double reachable_rate() const;
  double shortest_rate() const;
};

/// The explicit pipeline: instruction text -> canonical path through the
/// extraction loop over some backend.
struct ExplicitMethod {
  ExtractorBackend* backend = nullptr;
  RetryBudget budget;
  std::string id = "grammar";
};

/// The implicit baseline: instructions go into a prompt, the endpoint's
/// free-text answer is parsed leniently.
struct ImplicitMethod {
  LlmClient* client = nullptr;
  std::string id = "llm";
};

using EvalMethodContext = std::variant<ExplicitMethod, ImplicitMethod>;

/// Reverse-path protocol: each item's instruction is turned around and
/// compared against the reversed ground truth; success needs equal
/// waypoints and equal actions.
EvalReport eval_reverse(const PathDataset& dataset,
                        const EvalMethodContext& method);

/// Combined-path (leave-one-out) protocol: each item is answered from the
/// other nine routes only, and scored against the environment — the answer
/// must be a real start-to-goal walk whose interior actions all match the
/// geometric oracle (reachable); shortest additionally requires the true
/// minimal edge count. Correct alternative routes count as success; the
/// held-out text itself is never string-compared.
EvalReport eval_combined(const GeoEnvironment& env, const PathDataset& dataset,
                         const EvalMethodContext& method,
                         AngleThreshold theta = AngleThreshold{});

/// Best-effort reading of free-form route text: place names in order of
/// mention (quoted strings always count; bare capitalized runs count when
/// they are not route-prose words), consecutive repeats collapsed, and the
/// turn keyword between two places becomes the action at the earlier one.
/// Returns nullopt when no valid path emerges.
std::optional<CanonicalPath> lenient_parse(std::string_view text);

nlohmann::json report_to_json(const EvalReport& report);

/// Aligned-column table of one report: method, backend, rates, and the
/// failure breakdown.
std::string report_to_table(const EvalReport& report);

}  // namespace textnav
