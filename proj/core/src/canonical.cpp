#include "textnav/canonical.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <sstream>

namespace textnav {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
         c == '\v';
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_gap = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_gap = !out.empty();
      continue;
    }
    if (pending_gap) {
      out.push_back(' ');
      pending_gap = false;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

NodeName::NodeName(std::string_view text) {
  std::string_view trimmed = text;
  while (!trimmed.empty() && is_space(trimmed.front())) {
    trimmed.remove_prefix(1);
  }
  while (!trimmed.empty() && is_space(trimmed.back())) {
    trimmed.remove_suffix(1);
  }
  if (trimmed.empty()) {
    throw std::invalid_argument("node name is empty");
  }
  if (trimmed.find('\n') != std::string_view::npos ||
      trimmed.find('\r') != std::string_view::npos) {
    throw std::invalid_argument("node name contains a newline: \"" +
                                std::string(text) + "\"");
  }
  text_ = collapse_whitespace(trimmed);
  key_ = fold_name(text_);
}

std::string fold_name(std::string_view text) {
  std::string folded = collapse_whitespace(text);
  std::transform(folded.begin(), folded.end(), folded.begin(), [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  });
  return folded;
}

std::vector<PathViolation> validate(const CanonicalPath& path) {
  std::vector<PathViolation> violations;
  if (path.waypoints.size() < 2) {
    violations.push_back({"a path needs at least two waypoints, got " +
                          std::to_string(path.waypoints.size())});
  }
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    if (path.waypoints[i] == path.waypoints[i - 1]) {
      violations.push_back({"consecutive repeated waypoint \"" +
                            path.waypoints[i].text() + "\" at position " +
                            std::to_string(i)});
    }
  }
  const std::size_t expected =
      path.waypoints.size() >= 2 ? path.waypoints.size() - 2 : 0;
  if (path.actions.size() != expected) {
    violations.push_back({"expected " + std::to_string(expected) +
                          " actions for " +
                          std::to_string(path.waypoints.size()) +
                          " waypoints, got " +
                          std::to_string(path.actions.size())});
  }
  return violations;
}

bool is_valid(const CanonicalPath& path) {
  return validate(path).empty();
}

void require_valid(const CanonicalPath& path) {
  const auto violations = validate(path);
  if (violations.empty()) {
    return;
  }
  std::string message = "invalid canonical path:";
  for (const auto& v : violations) {
    message += " " + v.message + ";";
  }
  message.pop_back();
  throw std::invalid_argument(message);
}

CanonicalPath reverse(const CanonicalPath& path) {
  require_valid(path);
  CanonicalPath out;
  out.waypoints.assign(path.waypoints.rbegin(), path.waypoints.rend());
  out.actions.reserve(path.actions.size());
  for (auto it = path.actions.rbegin(); it != path.actions.rend(); ++it) {
    out.actions.push_back(inverse(*it));
  }
  return out;
}

void to_json(nlohmann::json& j, const CanonicalPath& path) {
  auto waypoints = nlohmann::json::array();
  for (const auto& w : path.waypoints) {
    waypoints.push_back(w.text());
  }
  auto actions = nlohmann::json::array();
  for (Action a : path.actions) {
    actions.push_back(std::string(1, action_token(a)));
  }
  j = nlohmann::json{{"waypoints", std::move(waypoints)},
                     {"actions", std::move(actions)}};
}

void from_json(const nlohmann::json& j, CanonicalPath& path) {
  path.waypoints.clear();
  path.actions.clear();
  for (const auto& w : j.at("waypoints")) {
    path.waypoints.emplace_back(w.get<std::string>());
  }
  for (const auto& a : j.at("actions")) {
    path.actions.push_back(action_from_token(a.get<std::string>()));
  }
}

std::string describe(const CanonicalPath& path) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    if (i > 0) {
      out << ", ";
    }
    out << path.waypoints[i].text();
  }
  out << "] / [";
  for (std::size_t i = 0; i < path.actions.size(); ++i) {
    if (i > 0) {
      out << ", ";
    }
    out << action_token(path.actions[i]);
  }
  out << ']';
  return out.str();
}

}  // namespace textnav
