#include "textnav/action.hpp"

#include <cmath>
#include <numbers>

namespace textnav {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
}

AngleThreshold::AngleThreshold() : theta_(kPi / 4.0) {}

AngleThreshold::AngleThreshold(double radians) : theta_(radians) {
  if (!std::isfinite(radians) || radians <= 0.0 || radians >= kPi / 2.0) {
    throw std::invalid_argument("angle threshold must lie in (0, pi/2), got " +
                                std::to_string(radians));
  }
}

double normalize_angle(double radians) {
  if (!std::isfinite(radians)) {
    throw std::invalid_argument("cannot normalize a non-finite angle");
  }
  double wrapped = std::remainder(radians, 2.0 * kPi);  // lands in [-pi, pi]
  if (wrapped <= -kPi) {
    wrapped = kPi;
  }
  return wrapped;
}

Action from_angle(double angle, AngleThreshold theta) {
  if (!std::isfinite(angle) || angle <= -kPi || angle > kPi) {
    throw std::domain_error("angle must lie in (-pi, pi], got " +
                            std::to_string(angle));
  }
  const double t = theta.radians();
  const double mag = std::fabs(angle);
  if (mag <= t) {
    return Action::Forward;
  }
  if (mag >= kPi - t) {
    return Action::TurnAround;
  }
  return angle > 0.0 ? Action::TurnLeft : Action::TurnRight;
}

Action compose(Action a, Action b) noexcept {
  return from_quarter_turns(to_quarter_turns(a) + to_quarter_turns(b));
}

Action inverse(Action a) noexcept {
  return from_quarter_turns(-to_quarter_turns(a));
}

int to_quarter_turns(Action a) noexcept {
  return static_cast<int>(a);
}

Action from_quarter_turns(int quarter_turns) noexcept {
  int q = quarter_turns % 4;
  if (q < 0) {
    q += 4;
  }
  return static_cast<Action>(q);
}

char action_token(Action a) noexcept {
  switch (a) {
    case Action::Forward:
      return 'F';
    case Action::TurnLeft:
      return 'L';
    case Action::TurnAround:
      return 'T';
    case Action::TurnRight:
      return 'R';
  }
  return '?';
}

Action action_from_token(std::string_view token) {
  if (token.size() == 1) {
    switch (token.front()) {
      case 'F':
        return Action::Forward;
      case 'L':
        return Action::TurnLeft;
      case 'T':
        return Action::TurnAround;
      case 'R':
        return Action::TurnRight;
      default:
        break;
    }
  }
  throw std::invalid_argument("unknown action token \"" + std::string(token) +
                              "\" (expected F, L, R or T)");
}

std::string_view action_name(Action a) noexcept {
  switch (a) {
    case Action::Forward:
      return "forward";
    case Action::TurnLeft:
      return "turn left";
    case Action::TurnAround:
      return "turn around";
    case Action::TurnRight:
      return "turn right";
  }
  return "unknown";
}

}  // namespace textnav
