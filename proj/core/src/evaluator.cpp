#include "textnav/evaluator.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "text_tokens.hpp"

namespace textnav {

std::string_view eval_task_name(EvalTask task) noexcept {
  return task == EvalTask::Reverse ? "reverse" : "combined";
}

std::string_view eval_method_name(EvalMethod method) noexcept {
  return method == EvalMethod::Explicit ? "explicit" : "implicit";
}

std::string_view item_outcome_name(ItemOutcome outcome) noexcept {
  switch (outcome) {
    case ItemOutcome::SucceededShortest:
      return "shortest";
    case ItemOutcome::SucceededReachableOnly:
      return "reachable";
    case ItemOutcome::FailedParse:
      return "failed-parse";
    case ItemOutcome::FailedInsufficient:
      return "failed-insufficient";
    case ItemOutcome::FailedWrong:
      return "failed-wrong";
  }
  return "unknown";
}

void EvalReport::add(EvalItem item) {
  ++totals.attempted;
  switch (item.outcome) {
    case ItemOutcome::SucceededShortest:
      ++totals.succeeded_reachable;
      ++totals.succeeded_shortest;
      break;
    case ItemOutcome::SucceededReachableOnly:
      ++totals.succeeded_reachable;
      break;
    case ItemOutcome::FailedParse:
      ++totals.failed_parse;
      break;
    case ItemOutcome::FailedInsufficient:
      ++totals.failed_insufficient;
      break;
    case ItemOutcome::FailedWrong:
      ++totals.failed_wrong;
      break;
  }
  items.push_back(std::move(item));
}

void EvalReport::merge(const EvalReport& other) {
  if (task != other.task || method != other.method ||
      backend_id != other.backend_id) {
    throw std::invalid_argument(
        "cannot merge reports of different tasks, methods or backends");
  }
  totals.attempted += other.totals.attempted;
  totals.succeeded_reachable += other.totals.succeeded_reachable;
  totals.succeeded_shortest += other.totals.succeeded_shortest;
  totals.failed_parse += other.totals.failed_parse;
  totals.failed_insufficient += other.totals.failed_insufficient;
  totals.failed_wrong += other.totals.failed_wrong;
  items.insert(items.end(), other.items.begin(), other.items.end());
}

double EvalReport::reachable_rate() const {
  return totals.attempted == 0
             ? 0.0
             : static_cast<double>(totals.succeeded_reachable) /
                   static_cast<double>(totals.attempted);
}

double EvalReport::shortest_rate() const {
  return totals.attempted == 0
             ? 0.0
             : static_cast<double>(totals.succeeded_shortest) /
                   static_cast<double>(totals.attempted);
}

// ---------------------------------------------------------------------------
// shared scoring
// ---------------------------------------------------------------------------

namespace {

struct WalkScore {
  bool reachable = false;
  bool shortest = false;
  std::string detail;
};

// oracle-grounded scoring: the answer must be a real start-to-goal walk in
// the environment with oracle-agreeing interior actions; string equality
// with the held-out route is never required
WalkScore score_walk(const GeoEnvironment& env, const NodeName& start,
                     const NodeName& goal, const CanonicalPath& path,
                     AngleThreshold theta) {
  WalkScore score;
  if (!is_valid(path)) {
    score.detail = "answer is not a valid canonical path";
    return score;
  }
  if (!(path.waypoints.front() == start)) {
    score.detail = "walk starts at \"" + path.waypoints.front().text() +
                   "\" instead of \"" + start.text() + "\"";
    return score;
  }
  if (!(path.waypoints.back() == goal)) {
    score.detail = "walk ends at \"" + path.waypoints.back().text() +
                   "\" instead of \"" + goal.text() + "\"";
    return score;
  }
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    if (!env.has_node(path.waypoints[i].key()) ||
        !env.has_node(path.waypoints[i - 1].key()) ||
        !env.has_edge(path.waypoints[i - 1].key(), path.waypoints[i].key())) {
      score.detail = "no edge between \"" + path.waypoints[i - 1].text() +
                     "\" and \"" + path.waypoints[i].text() + "\"";
      return score;
    }
  }
  for (std::size_t i = 1; i + 1 < path.waypoints.size(); ++i) {
    const Action truth =
        ground_truth_action(env, path.waypoints[i - 1].key(),
                            path.waypoints[i].key(),
                            path.waypoints[i + 1].key(), theta);
    if (path.actions[i - 1] != truth) {
      score.detail = "action at \"" + path.waypoints[i].text() +
                     "\" should be " + std::string(action_name(truth)) +
                     ", answer says " +
                     std::string(action_name(path.actions[i - 1]));
      return score;
    }
  }
  score.reachable = true;
  const auto distance = graph_distance(env, start.key(), goal.key());
  score.shortest =
      distance && path.waypoints.size() == static_cast<std::size_t>(*distance) + 1;
  if (!score.shortest) {
    score.detail = "walk is reachable but longer than the shortest route";
  }
  return score;
}

std::string backend_id_of(const EvalMethodContext& method) {
  if (const auto* explicit_method = std::get_if<ExplicitMethod>(&method)) {
    return explicit_method->id;
  }
  return std::get<ImplicitMethod>(method).id;
}

// text -> canonical path through the explicit pipeline; error text on failure
std::variant<CanonicalPath, std::string> run_explicit(
    const ExplicitMethod& method, const std::string& instruction) {
  if (!method.backend) {
    throw std::invalid_argument("explicit method needs a backend");
  }
  ExtractionResult result =
      extract_canonical(instruction, *method.backend, method.budget);
  if (const auto* success = std::get_if<ExtractionSuccess>(&result)) {
    return success->path;
  }
  const auto& error = std::get<ExtractionError>(result);
  return error.message + " (after " + std::to_string(error.attempts) +
         " attempt(s))";
}

}  // namespace

// ---------------------------------------------------------------------------
// reverse-path evaluation
// ---------------------------------------------------------------------------

EvalReport eval_reverse(const PathDataset& dataset,
                        const EvalMethodContext& method) {
  EvalReport report;
  report.task = EvalTask::Reverse;
  report.method = std::holds_alternative<ExplicitMethod>(method)
                      ? EvalMethod::Explicit
                      : EvalMethod::Implicit;
  report.backend_id = backend_id_of(method);

  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const DatasetItem& item = dataset.items[i];
    EvalItem row{dataset.environment_id, static_cast<int>(i),
                 item.start.text(), item.goal.text()};
    const CanonicalPath expected = reverse(item.truth);

    std::optional<CanonicalPath> answer;
    if (const auto* explicit_method = std::get_if<ExplicitMethod>(&method)) {
      auto parsed = run_explicit(*explicit_method, item.instruction);
      if (const auto* path = std::get_if<CanonicalPath>(&parsed)) {
        answer = reverse(*path);
      } else {
        row.outcome = ItemOutcome::FailedParse;
        row.detail = std::get<std::string>(parsed);
      }
    } else {
      const auto& implicit_method = std::get<ImplicitMethod>(method);
      if (!implicit_method.client) {
        throw std::invalid_argument("implicit method needs a client");
      }
      try {
        const std::string text = implicit_method.client->implicit_query(
            ImplicitMode::Reverse, {item.instruction});
        answer = lenient_parse(text);
        if (!answer) {
          row.outcome = ItemOutcome::FailedParse;
          row.detail = "no route could be read from the answer: " + text;
        }
      } catch (const BackendError& e) {
        row.outcome = ItemOutcome::FailedParse;
        row.detail = e.what();
      }
    }

    if (answer) {
      row.output = answer;
      if (*answer == expected) {
        row.outcome = ItemOutcome::SucceededShortest;
      } else {
        row.outcome = ItemOutcome::FailedWrong;
        row.detail = "expected " + describe(expected) + ", got " +
                     describe(*answer);
      }
    }
    report.add(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// combined-path evaluation
// ---------------------------------------------------------------------------

EvalReport eval_combined(const GeoEnvironment& env, const PathDataset& dataset,
                         const EvalMethodContext& method,
                         AngleThreshold theta) {
  EvalReport report;
  report.task = EvalTask::Combined;
  report.method = std::holds_alternative<ExplicitMethod>(method)
                      ? EvalMethod::Explicit
                      : EvalMethod::Implicit;
  report.backend_id = backend_id_of(method);

  for (std::size_t held_out = 0; held_out < dataset.items.size();
       ++held_out) {
    const DatasetItem& item = dataset.items[held_out];
    EvalItem row{dataset.environment_id, static_cast<int>(held_out),
                 item.start.text(), item.goal.text()};

    std::optional<CanonicalPath> answer;
    if (const auto* explicit_method = std::get_if<ExplicitMethod>(&method)) {
      TopoMap map;
      bool build_failed = false;
      for (std::size_t j = 0; j < dataset.items.size() && !build_failed;
           ++j) {
        if (j == held_out) {
          continue;
        }
        auto parsed =
            run_explicit(*explicit_method, dataset.items[j].instruction);
        if (const auto* path = std::get_if<CanonicalPath>(&parsed)) {
          if (const auto conflict = map.add_path(*path)) {
            row.outcome = ItemOutcome::FailedParse;
            row.detail = "extracted routes contradict each other: " +
                         conflict->describe();
            build_failed = true;
          }
        } else {
          row.outcome = ItemOutcome::FailedParse;
          row.detail = "route " + std::to_string(j) + ": " +
                       std::get<std::string>(parsed);
          build_failed = true;
        }
      }
      if (!build_failed) {
        RouteResult result =
            find_route(map, RouteQuery{item.start, item.goal});
        if (const auto* path = std::get_if<CanonicalPath>(&result)) {
          answer = *path;
        } else {
          row.outcome = ItemOutcome::FailedInsufficient;
          row.detail = std::get<RouteFailure>(result).describe();
        }
      }
    } else {
      const auto& implicit_method = std::get<ImplicitMethod>(method);
      if (!implicit_method.client) {
        throw std::invalid_argument("implicit method needs a client");
      }
      std::vector<std::string> instructions;
      for (std::size_t j = 0; j < dataset.items.size(); ++j) {
        if (j != held_out) {
          instructions.push_back(dataset.items[j].instruction);
        }
      }
      try {
        const std::string text = implicit_method.client->implicit_query(
            ImplicitMode::Combined, instructions, item.start.text(),
            item.goal.text());
        answer = lenient_parse(text);
        if (!answer) {
          row.outcome = ItemOutcome::FailedParse;
          row.detail = "no route could be read from the answer: " + text;
        }
      } catch (const BackendError& e) {
        row.outcome = ItemOutcome::FailedParse;
        row.detail = e.what();
      }
    }

    if (answer) {
      row.output = answer;
      const WalkScore score =
          score_walk(env, item.start, item.goal, *answer, theta);
      if (score.shortest) {
        row.outcome = ItemOutcome::SucceededShortest;
      } else if (score.reachable) {
        row.outcome = ItemOutcome::SucceededReachableOnly;
        row.detail = score.detail;
      } else {
        row.outcome = ItemOutcome::FailedWrong;
        row.detail = score.detail;
      }
    }
    report.add(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// lenient free-text reading
// ---------------------------------------------------------------------------

namespace {

// prose words that start sentences or clauses in route descriptions; a
// capitalized run starting with one of these is not a place name
bool prose_word(const std::string& lower) {
  static const std::vector<std::string_view> kProseWords = {
      "from",   "then",   "continue", "start",   "depart",  "begin",
      "commence", "go",   "head",     "walk",    "move",    "proceed",
      "advance", "turn",  "swing",    "guide",   "the",     "path",
      "you",    "your",   "however",  "finally", "first",   "next",
      "and",    "to",     "at",       "in",      "on",      "of",
      "a",      "an",     "step",     "take",    "show",    "reverse",
      "route",  "arrive", "towards",  "there",   "only",    "is",
      "are",    "was",    "were",     "be",      "it",      "this",
      "that",   "i",      "we",       "not",     "no",      "yes",
      "please", "sorry",  "cannot",   "can",     "will",    "wait",
      "here",   "after",  "before",   "when",    "where",   "once",
      "again",  "now",    "left",     "right",   "around",  "straight"};
  return std::find(kProseWords.begin(), kProseWords.end(), lower) !=
         kProseWords.end();
}

bool starts_upper(const std::string& word) {
  return !word.empty() &&
         std::isupper(static_cast<unsigned char>(word.front())) != 0;
}

std::string strip_parentheses(std::string_view text) {
  std::string out;
  int depth = 0;
  for (char c : text) {
    if (c == '(') {
      ++depth;
      continue;
    }
    if (c == ')') {
      depth = std::max(0, depth - 1);
      continue;
    }
    if (depth == 0) {
      out.push_back(c);
    }
  }
  return out;
}

struct Mention {
  std::string name;
  std::size_t first_token = 0;  // token index of the first word
  std::size_t last_token = 0;   // token index of the last word
};

}  // namespace

std::optional<CanonicalPath> lenient_parse(std::string_view text) {
  const std::string cleaned = strip_parentheses(text);
  const std::vector<detail::Token> tokens = detail::tokenize(cleaned);

  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& token = tokens[i];
    if (token.kind == detail::Token::Kind::Quoted) {
      if (!token.text.empty()) {
        mentions.push_back({token.text, i, i});
      }
      continue;
    }
    if (token.kind != detail::Token::Kind::Word || !starts_upper(token.text) ||
        prose_word(token.lower)) {
      continue;
    }
    // bare capitalized run
    Mention mention{token.text, i, i};
    while (i + 1 < tokens.size() &&
           tokens[i + 1].kind == detail::Token::Kind::Word &&
           starts_upper(tokens[i + 1].text) &&
           !prose_word(tokens[i + 1].lower)) {
      ++i;
      mention.name += " " + tokens[i].text;
      mention.last_token = i;
    }
    mentions.push_back(std::move(mention));
  }

  // collapse consecutive repeats, keeping the latest mention's position so
  // the action search looks between the last departure and the next arrival
  std::vector<Mention> places;
  for (auto& mention : mentions) {
    if (!places.empty() &&
        fold_name(places.back().name) == fold_name(mention.name)) {
      places.back().last_token = mention.last_token;
      continue;
    }
    places.push_back(std::move(mention));
  }
  if (places.size() < 2) {
    return std::nullopt;
  }

  CanonicalPath path;
  try {
    for (const auto& place : places) {
      path.waypoints.emplace_back(place.name);
    }
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  for (std::size_t i = 1; i + 1 < places.size(); ++i) {
    // turn keywords between leaving waypoint i and reaching waypoint i+1
    Action action = Action::Forward;
    for (std::size_t t = places[i].last_token + 1;
         t < places[i + 1].first_token; ++t) {
      if (tokens[t].kind != detail::Token::Kind::Word) {
        continue;
      }
      if (tokens[t].lower == "left") {
        action = Action::TurnLeft;
        break;
      }
      if (tokens[t].lower == "right") {
        action = Action::TurnRight;
        break;
      }
      if (tokens[t].lower == "around" || tokens[t].lower == "u-turn") {
        action = Action::TurnAround;
        break;
      }
    }
    path.actions.push_back(action);
  }

  if (!is_valid(path)) {
    return std::nullopt;
  }
  return path;
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : report.items) {
    nlohmann::json row{{"environment", item.environment_id},
                       {"index", item.index},
                       {"start", item.start},
                       {"goal", item.goal},
                       {"outcome", std::string(item_outcome_name(item.outcome))},
                       {"detail", item.detail}};
    if (item.output) {
      nlohmann::json output;
      to_json(output, *item.output);
      row["output"] = std::move(output);
    } else {
      row["output"] = nullptr;
    }
    items.push_back(std::move(row));
  }
  return nlohmann::json{
      {"task", std::string(eval_task_name(report.task))},
      {"method", std::string(eval_method_name(report.method))},
      {"backend", report.backend_id},
      {"totals",
       {{"attempted", report.totals.attempted},
        {"succeeded_reachable", report.totals.succeeded_reachable},
        {"succeeded_shortest", report.totals.succeeded_shortest},
        {"failed_parse", report.totals.failed_parse},
        {"failed_insufficient", report.totals.failed_insufficient},
        {"failed_wrong", report.totals.failed_wrong}}},
      {"items", std::move(items)}};
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  const auto rate = [](int count, int total) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(1)
         << (total == 0 ? 0.0
                        : 100.0 * static_cast<double>(count) /
                              static_cast<double>(total))
         << "% (" << count << "/" << total << ")";
    return cell.str();
  };

  out << "Success rate of " << eval_task_name(report.task)
      << " paths evaluation\n";
  if (report.task == EvalTask::Reverse) {
    out << std::left << std::setw(10) << "method" << std::setw(18)
        << "backend" << "success\n";
    out << std::left << std::setw(10) << eval_method_name(report.method)
        << std::setw(18) << report.backend_id
        << rate(report.totals.succeeded_reachable, report.totals.attempted)
        << '\n';
  } else {
    out << std::left << std::setw(10) << "method" << std::setw(18)
        << "backend" << std::setw(18) << "reachable" << "shortest\n";
    out << std::left << std::setw(10) << eval_method_name(report.method)
        << std::setw(18) << report.backend_id << std::setw(18)
        << rate(report.totals.succeeded_reachable, report.totals.attempted)
        << rate(report.totals.succeeded_shortest, report.totals.attempted)
        << '\n';
  }
  out << "failures: parse=" << report.totals.failed_parse
      << " insufficient=" << report.totals.failed_insufficient
      << " wrong=" << report.totals.failed_wrong << '\n';
  return out.str();
}

}  // namespace textnav
