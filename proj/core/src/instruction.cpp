#include "textnav/instruction.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include "text_tokens.hpp"

namespace textnav {

namespace {

using detail::Token;
using detail::is_punct_char;
using detail::is_word_space;
using detail::to_lower;

struct ParseAbort {
  ParseError error;
};

[[noreturn]] void abort_parse(std::size_t offset, std::string message) {
  throw ParseAbort{ParseError{offset, std::move(message)}};
}

std::vector<Token> tokenize_strict(std::string_view text) {
  std::optional<std::size_t> unterminated;
  std::vector<Token> tokens = detail::tokenize(text, &unterminated);
  if (unterminated) {
    abort_parse(*unterminated, "unterminated quote");
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// keyword tables
// ---------------------------------------------------------------------------

using Phrase = std::vector<std::string_view>;

const std::vector<Phrase> kStartVerbs = {
    {"depart", "from"}, {"begin", "in"}, {"commence", "on"}, {"start", "at"}};

// longest phrases first so "continue on to" beats the "continue on"
// connector and "head straight to" beats "head to"
const std::vector<Phrase> kProceedVerbs = {
    {"continue", "on", "to"}, {"head", "straight", "to"}, {"proceed", "to"},
    {"advance", "to"},        {"go", "to"},               {"head", "to"},
    {"walk", "to"},           {"move", "through"},        {"towards"}};

const std::vector<Phrase> kTurnVerbs = {{"guide", "yourself"}, {"turn"},
                                        {"swing"}};

// single words that end a bare place-name run
constexpr std::array<std::string_view, 15> kBoundaryWords = {
    "to",      "and",  "then", "there", "turn",  "swing",   "guide",
    "proceed", "continue", "advance", "go", "head", "walk", "move",
    "towards"};

// every keyword the grammar can consume; a bare name containing one of
// these must be quoted by the generator
constexpr std::array<std::string_view, 30> kReservedWords = {
    "depart", "from",  "begin",   "in",     "commence", "on",     "start",
    "at",     "to",    "and",     "proceed", "continue", "advance", "go",
    "head",   "walk",  "move",    "through", "towards",  "then",   "turn",
    "swing",  "guide", "yourself", "left",   "right",    "around", "there",
    "straight", "the"};

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

class Parser {
public:
  explicit Parser(std::string_view text)
      : text_(text), tokens_(tokenize_strict(text)) {}

  CanonicalPath parse() {
    parse_start_verb();
    std::vector<NodeName> waypoints;
    std::vector<Action> actions;
    waypoints.push_back(parse_place());
    parse_start_link();
    waypoints.push_back(parse_place());

    while (true) {
      skip_connectors();
      if (at_end()) {
        break;
      }
      const std::size_t clause_offset = offset_here();
      const auto turn = try_turn_phrase();
      if (!try_proceed_verb()) {
        if (turn) {
          abort_parse(offset_here(),
                      "expected a movement after the turn phrase");
        }
        abort_parse(clause_offset, "unrecognized clause");
      }
      waypoints.push_back(parse_place());
      actions.push_back(turn.value_or(Action::Forward));
    }

    CanonicalPath path{std::move(waypoints), std::move(actions)};
    const auto violations = validate(path);
    if (!violations.empty()) {
      std::string message = violations.front().message;
      for (std::size_t v = 1; v < violations.size(); ++v) {
        message += "; " + violations[v].message;
      }
      abort_parse(0, message);
    }
    return path;
  }

private:
  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= tokens_.size(); }

  std::size_t offset_here() const {
    return at_end() ? text_.size() : tokens_[pos_].offset;
  }

  bool word_at(std::size_t i, std::string_view w) const {
    return i < tokens_.size() && tokens_[i].kind == Token::Kind::Word &&
           tokens_[i].lower == w;
  }

  bool phrase_at(std::size_t i, const Phrase& phrase) const {
    for (std::size_t k = 0; k < phrase.size(); ++k) {
      if (!word_at(i + k, phrase[k])) {
        return false;
      }
    }
    return true;
  }

  bool consume_phrase(const Phrase& phrase) {
    if (!phrase_at(pos_, phrase)) {
      return false;
    }
    pos_ += phrase.size();
    return true;
  }

  bool consume_any(const std::vector<Phrase>& phrases) {
    for (const auto& phrase : phrases) {
      if (consume_phrase(phrase)) {
        return true;
      }
    }
    return false;
  }

  bool consume_word(std::string_view w) {
    if (!word_at(pos_, w)) {
      return false;
    }
    ++pos_;
    return true;
  }

  bool consume_punct(std::string_view p) {
    if (pos_ < tokens_.size() && tokens_[pos_].kind == Token::Kind::Punct &&
        tokens_[pos_].text == p) {
      ++pos_;
      return true;
    }
    return false;
  }

  void parse_start_verb() {
    if (!consume_any(kStartVerbs)) {
      abort_parse(offset_here(),
                  "expected a start clause (\"Depart from\", \"Begin in\", "
                  "\"Commence on\" or \"Start at\")");
    }
  }

  // the connective between the two start places: "to", or a comma and/or
  // "and" followed by a movement verb ("', walk to'", "and proceed to",
  // ", move through")
  void parse_start_link() {
    consume_punct(",");
    if (consume_word("to")) {
      return;
    }
    consume_word("and");
    if (!try_proceed_verb()) {
      abort_parse(offset_here(),
                  "expected \"to\" or a movement verb after the start place");
    }
  }

  bool proceed_verb_here() const {
    return std::any_of(kProceedVerbs.begin(), kProceedVerbs.end(),
                       [&](const Phrase& p) { return phrase_at(pos_, p); });
  }

  bool turn_phrase_here() const {
    return std::any_of(kTurnVerbs.begin(), kTurnVerbs.end(),
                       [&](const Phrase& p) { return phrase_at(pos_, p); });
  }

  bool try_proceed_verb() { return consume_any(kProceedVerbs); }

  // turn-verb + direction, with the optional trailing "there" / "and"
  std::optional<Action> try_turn_phrase() {
    if (!turn_phrase_here()) {
      return std::nullopt;
    }
    consume_any(kTurnVerbs);
    Action action;
    if (consume_word("left")) {
      action = Action::TurnLeft;
    } else if (consume_word("right")) {
      action = Action::TurnRight;
    } else if (consume_word("around")) {
      action = Action::TurnAround;
    } else {
      abort_parse(offset_here(),
                  "expected \"left\", \"right\" or \"around\" after the turn "
                  "verb");
    }
    consume_word("there");
    consume_word("and");
    return action;
  }

  // skip clause glue: punctuation, "and", "then", "from there", and the
  // bare "continue on" connector — but never something that opens a
  // movement or turn
  void skip_connectors() {
    while (!at_end()) {
      if (tokens_[pos_].kind == Token::Kind::Punct) {
        ++pos_;
        continue;
      }
      if (proceed_verb_here() || turn_phrase_here()) {
        return;
      }
      if (consume_word("and") || consume_word("then") ||
          consume_phrase({"from", "there"}) ||
          consume_phrase({"continue", "on"})) {
        continue;
      }
      return;
    }
  }

  bool boundary_here() const {
    if (at_end() || tokens_[pos_].kind != Token::Kind::Word) {
      return true;
    }
    return std::find(kBoundaryWords.begin(), kBoundaryWords.end(),
                     tokens_[pos_].lower) != kBoundaryWords.end();
  }

  // a place is "the"? followed by a quoted span or a bare token run; bare
  // runs may continue only over capitalized or numeric tokens ("North
  // Hall", "Entry 2"), so surrounding prose never leaks into a name
  NodeName parse_place() {
    consume_word("the");
    if (pos_ < tokens_.size() && tokens_[pos_].kind == Token::Kind::Quoted) {
      const Token& tok = tokens_[pos_];
      ++pos_;
      return make_name(tok.text, tok.offset);
    }
    const std::size_t start_offset = offset_here();
    std::string name;
    while (!boundary_here()) {
      const std::string& word = tokens_[pos_].text;
      if (!name.empty()) {
        const auto head = static_cast<unsigned char>(word.front());
        if (!std::isupper(head) && !std::isdigit(head)) {
          break;
        }
        name.push_back(' ');
      }
      name += word;
      ++pos_;
    }
    if (name.empty()) {
      abort_parse(start_offset, "expected a place name");
    }
    return make_name(name, start_offset);
  }

  NodeName make_name(const std::string& raw, std::size_t offset) {
    try {
      return NodeName(raw);
    } catch (const std::invalid_argument& e) {
      abort_parse(offset, e.what());
    }
  }
};

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

bool reserved_word(std::string_view lower_word) {
  return std::find(kReservedWords.begin(), kReservedWords.end(), lower_word) !=
         kReservedWords.end();
}

bool needs_quoting(const std::string& name) {
  bool in_word = false;
  std::string word;
  for (char c : name) {
    if (is_word_space(c)) {
      if (in_word && reserved_word(to_lower(word))) {
        return true;
      }
      word.clear();
      in_word = false;
      continue;
    }
    if (is_punct_char(c) || c == '"') {
      return true;
    }
    word.push_back(c);
    in_word = true;
  }
  return in_word && reserved_word(to_lower(word));
}

std::string render_place(const NodeName& name) {
  const std::string& text = name.text();
  if (text.find(' ') == std::string::npos && !needs_quoting(text)) {
    return text;
  }
  if (text.find('"') != std::string::npos) {
    throw std::invalid_argument("place name cannot be written in an "
                                "instruction (contains a double quote): " +
                                text);
  }
  return '"' + text + '"';
}

}  // namespace

ParseResult parse_instruction(std::string_view text) {
  try {
    return Parser(text).parse();
  } catch (const ParseAbort& abort) {
    return abort.error;
  }
}

std::string generate_instruction(const CanonicalPath& path) {
  require_valid(path);
  std::string out = "Depart from " + render_place(path.waypoints[0]) + " to " +
                    render_place(path.waypoints[1]) + ".";
  for (std::size_t i = 2; i < path.waypoints.size(); ++i) {
    const std::string place = render_place(path.waypoints[i]);
    switch (path.actions[i - 2]) {
      case Action::Forward:
        out += " Then, proceed to " + place + ".";
        break;
      case Action::TurnLeft:
        out += " Then, turn left and proceed to " + place + ".";
        break;
      case Action::TurnRight:
        out += " Then, turn right and proceed to " + place + ".";
        break;
      case Action::TurnAround:
        out += " Then, turn around and proceed to " + place + ".";
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// extraction pipeline
// ---------------------------------------------------------------------------

ExtractionResult extract_canonical(const std::string& instruction,
                                   ExtractorBackend& backend,
                                   const RetryBudget& budget) {
  Extraction left;
  Extraction right;
  int attempts = 0;
  while (true) {
    ++attempts;
    try {
      left = backend.extract_left(instruction);
      right = backend.extract_right(instruction);
    } catch (const BackendError& e) {
      return ExtractionError{ExtractionError::Kind::BackendFailure, attempts,
                             e.what()};
    }
    if (left.waypoints == right.waypoints) {
      break;
    }
    if (attempts >= budget.max_attempts()) {
      return ExtractionError{
          ExtractionError::Kind::Disagreement, attempts,
          "extractors never agreed on the waypoint list within " +
              std::to_string(budget.max_attempts()) + " attempts"};
    }
  }

  CanonicalPath path{right.waypoints, {}};
  for (std::size_t k = 1; k + 1 < path.waypoints.size(); ++k) {
    const NodeName& w = path.waypoints[k];
    const bool marked_left = left.turn_points.contains(w);
    const bool marked_right = right.turn_points.contains(w);
    Action action = Action::Forward;
    if (marked_left && marked_right) {
      try {
        action = backend.check_turn(instruction, w) == TurnSide::Left
                     ? Action::TurnLeft
                     : Action::TurnRight;
      } catch (const BackendError& e) {
        return ExtractionError{ExtractionError::Kind::BackendFailure, attempts,
                               e.what()};
      }
    } else if (marked_left) {
      action = Action::TurnLeft;
    } else if (marked_right) {
      action = Action::TurnRight;
    }
    path.actions.push_back(action);
  }

  const auto violations = validate(path);
  if (!violations.empty()) {
    std::string message = "extracted waypoints do not form a valid path:";
    for (const auto& v : violations) {
      message += " " + v.message + ";";
    }
    message.pop_back();
    return ExtractionError{ExtractionError::Kind::InvalidPath, attempts,
                           message};
  }

  ExtractionRecord record{std::move(left.waypoints),
                          std::move(right.waypoints),
                          std::move(left.turn_points),
                          std::move(right.turn_points), attempts};
  return ExtractionSuccess{std::move(path), std::move(record)};
}

// ---------------------------------------------------------------------------
// grammar backend
// ---------------------------------------------------------------------------

CanonicalPath GrammarBackend::parse_or_throw(const std::string& instruction) {
  auto result = parse_instruction(instruction);
  if (const auto* error = std::get_if<ParseError>(&result)) {
    throw BackendError("grammar backend cannot parse the instruction at "
                       "byte " +
                       std::to_string(error->offset) + ": " + error->message);
  }
  return std::get<CanonicalPath>(std::move(result));
}

Extraction GrammarBackend::extract_side(const std::string& instruction,
                                        Action side) {
  const CanonicalPath path = parse_or_throw(instruction);
  Extraction out;
  out.waypoints = path.waypoints;
  for (std::size_t i = 0; i < path.actions.size(); ++i) {
    if (path.actions[i] == side) {
      out.turn_points.insert(path.waypoints[i + 1]);
    }
  }
  return out;
}

Extraction GrammarBackend::extract_left(const std::string& instruction) {
  return extract_side(instruction, Action::TurnLeft);
}

Extraction GrammarBackend::extract_right(const std::string& instruction) {
  return extract_side(instruction, Action::TurnRight);
}

TurnSide GrammarBackend::check_turn(const std::string& instruction,
                                    const NodeName& waypoint) {
  const CanonicalPath path = parse_or_throw(instruction);
  for (std::size_t i = 0; i < path.actions.size(); ++i) {
    if (path.waypoints[i + 1] == waypoint) {
      if (path.actions[i] == Action::TurnLeft) {
        return TurnSide::Left;
      }
      if (path.actions[i] == Action::TurnRight) {
        return TurnSide::Right;
      }
      throw BackendError("waypoint \"" + waypoint.text() +
                         "\" is not a turn point in this instruction");
    }
  }
  throw BackendError("waypoint \"" + waypoint.text() +
                     "\" is not an interior waypoint of this instruction");
}

}  // namespace textnav
