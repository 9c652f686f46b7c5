#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "deepadmr/sim/geometry.hpp"
#include "deepadmr/sim/packet.hpp"

namespace deepadmr::sim {

enum class EventKind {
  Inject,      // node = source
  Transmit,    // node = sender, peer = target or -1 for broadcast, value = ACK count
  Receive,     // node = receiver, peer = sender
  Duplicate,   // node = receiver, peer = sender
  Jammed,      // node = receiver whose frame was jammed, peer = sender
  AckLost,     // node = sender that missed an ACK, peer = receiver
  Deliver,     // node = destination, value = hop count
  DropTtl,     // node = holder
  DropRetry,   // node = holder; no neighbor accepted the copy within max_attempts
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Inject: return "inject";
    case EventKind::Transmit: return "tx";
    case EventKind::Receive: return "rx";
    case EventKind::Duplicate: return "dup";
    case EventKind::Jammed: return "jammed";
    case EventKind::AckLost: return "ack_lost";
    case EventKind::Deliver: return "deliver";
    case EventKind::DropTtl: return "drop_ttl";
    case EventKind::DropRetry: return "drop_retry";
  }
  return "?";
}

struct Event {
  std::int64_t slot = 0;
  NodeId node = 0;
  EventKind kind = EventKind::Inject;
  PacketId packet = 0;
  std::int64_t peer = -1;
  std::int64_t value = 0;

  bool operator==(const Event&) const = default;

  bool jammer_related() const { return kind == EventKind::Jammed || kind == EventKind::AckLost; }
};

/// One line per event: `slot node kind packet=<id> peer=<id> value=<v>`.
inline void write_event(std::ostream& os, const Event& e) {
  os << e.slot << '\t' << e.node << '\t' << to_string(e.kind) << "\tpacket=" << e.packet << "\tpeer=" << e.peer
     << "\tvalue=" << e.value << '\n';
}

using EventLog = std::vector<Event>;

}  // namespace deepadmr::sim
