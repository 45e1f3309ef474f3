#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace textnav {

/// The four navigation actions at a waypoint, quantized from the heading
/// change between the incoming and outgoing edge. The set forms a cyclic
/// group of order 4 under compose(): Forward is the identity and each
/// action corresponds to a number of quarter turns to the left.
enum class Action : std::uint8_t {
  Forward = 0,
  TurnLeft = 1,
  TurnAround = 2,
  TurnRight = 3,
};

/// Angle threshold separating "forward" from a turn, in radians.
/// Must lie strictly inside (0, pi/2) or the four quantization ranges
/// would overlap or vanish. Defaults to pi/4 (symmetric quarter planes).
class AngleThreshold {
public:
  AngleThreshold();
  explicit AngleThreshold(double radians);

  double radians() const noexcept { return theta_; }

private:
  double theta_;
};

/// Wraps an arbitrary finite angle into (-pi, pi].
/// Throws std::invalid_argument for non-finite input.
double normalize_angle(double radians);

/// Quantizes a heading deviation into one of the four actions.
/// `angle` is the signed deviation of the outgoing direction from
/// straight-ahead, positive to the left, and must already lie in
/// (-pi, pi] (see normalize_angle). Boundaries are inclusive for
/// Forward (|angle| == theta) and TurnAround (|angle| == pi - theta).
/// Throws std::domain_error when `angle` is outside the domain.
Action from_angle(double angle, AngleThreshold theta = AngleThreshold{});

/// Group product of two actions (quarter-turn addition mod 4).
Action compose(Action a, Action b) noexcept;

/// Group inverse: compose(a, inverse(a)) == Forward.
Action inverse(Action a) noexcept;

/// Encodes an action as its number of leftward quarter turns (0..3).
int to_quarter_turns(Action a) noexcept;

/// Decodes a quarter-turn count back to an action. Any integer is
/// accepted and reduced mod 4, so arithmetic on encodings stays closed.
Action from_quarter_turns(int quarter_turns) noexcept;

/// One-letter token used in every file format and CLI output: F, L, R, T.
char action_token(Action a) noexcept;

/// Parses a one-letter action token. Throws std::invalid_argument on
/// anything but "F", "L", "R" or "T".
Action action_from_token(std::string_view token);

/// Human-readable name ("forward", "turn left", ...), used in diagnostics.
std::string_view action_name(Action a) noexcept;

}  // namespace textnav
