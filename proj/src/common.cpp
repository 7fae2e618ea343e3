#include "restrict_est/common.hpp"

namespace restrict_est {

Component component_from_int(int i) {
  if (i == 1) return Component::first;
  if (i == 2) return Component::second;
  throw ConfigError("component must be 1 or 2, got " + std::to_string(i));
}

std::string_view to_string(Orientation o) {
  return o == Orientation::location ? "location" : "scale";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::non_decreasing: return "non-decreasing";
    case Direction::non_increasing: return "non-increasing";
    case Direction::indeterminate: break;
  }
  return "indeterminate";
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::non_decreasing: return Direction::non_increasing;
    case Direction::non_increasing: return Direction::non_decreasing;
    case Direction::indeterminate: break;
  }
  return Direction::indeterminate;
}

}  // namespace restrict_est
