#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepadmr/sim/channel.hpp"
#include "deepadmr/sim/dpd.hpp"
#include "deepadmr/sim/packet.hpp"

namespace deepadmr::sim {

/// Physical-layer request resolved from a routing action.
struct TxRequest {
  bool broadcast = true;
  NodeId target = 0;  // meaningful for unicast only

  static TxRequest to_all() { return {true, 0}; }
  static TxRequest to(NodeId n) { return {false, n}; }
};

struct Reception {
  NodeId receiver = 0;
  bool linked = false;     // receiver was a current neighbor
  bool jammed = false;     // data frame lost to a SUPPRESS_ALL jammer at the receiver
  bool duplicate = false;  // rejected by the receiver's DPD
  bool accepted = false;   // fresh copy taken by the receiver
  bool acked = false;      // the ACK for an accepted copy reached the sender
};

struct TransmitOutcome {
  std::vector<Reception> receptions;
  int ack_count = 0;                 // n_t observed at the sender
  bool reached_destination = false;  // destination accepted a fresh copy
  bool destination_acked = false;    // ...and its ACK made it back (D_t)
};

/// Delivers one frame. Receivers run DPD (mutating `dpd`); failures are encoded in the outcome.
inline TransmitOutcome transmit(NodeId sender, TxRequest request, const Packet& packet, const LinkGraph& links,
                                const ChannelModel& channel, std::span<const Vec2> positions, std::int64_t slot,
                                std::span<DpdCache> dpd) {
  TransmitOutcome out;
  const bool sender_deaf = channel.ack_suppressed(sender, positions, slot);

  auto receive = [&](NodeId r, bool linked) {
    Reception rx{.receiver = r, .linked = linked};
    if (linked) {
      if (channel.reception_suppressed(r, positions, slot)) {
        rx.jammed = true;
      } else if (!dpd[r].insert(packet.packet_id)) {
        rx.duplicate = true;
      } else {
        rx.accepted = true;
        rx.acked = !sender_deaf;
      }
    }
    if (rx.acked) ++out.ack_count;
    if (rx.accepted && r == packet.destination) {
      out.reached_destination = true;
      out.destination_acked = rx.acked;
    }
    out.receptions.push_back(rx);
  };

  if (request.broadcast) {
    for (NodeId r : links.neighbors(sender)) receive(r, true);
  } else {
    const bool linked = request.target != sender && request.target < links.size() && links.linked(sender, request.target);
    receive(request.target, linked);
  }
  return out;
}

}  // namespace deepadmr::sim
