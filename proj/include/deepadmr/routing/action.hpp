#pragma once

#include <cstddef>
#include <stdexcept>

namespace deepadmr::routing {

/// Routing decision. Flat index 0 is BROADCAST; index s+1 is UNICAST to neighbor slot s.
struct Action {
  enum class Kind { Broadcast, Unicast };

  Kind kind = Kind::Broadcast;
  std::size_t slot = 0;

  static constexpr Action broadcast() { return {Kind::Broadcast, 0}; }
  static constexpr Action unicast(std::size_t s) { return {Kind::Unicast, s}; }

  static constexpr Action from_index(std::size_t index) {
    return index == 0 ? broadcast() : unicast(index - 1);
  }

  constexpr std::size_t index() const { return kind == Kind::Broadcast ? 0 : slot + 1; }
  constexpr bool is_broadcast() const { return kind == Kind::Broadcast; }

  constexpr bool operator==(const Action&) const = default;
};

/// Number of distinct actions for a neighbor capacity.
constexpr std::size_t action_count(std::size_t k_max) { return k_max + 1; }

}  // namespace deepadmr::routing
