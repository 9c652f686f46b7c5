#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/sim/geometry.hpp"

namespace deepadmr::sim {

using PacketId = std::uint64_t;

struct Packet {
  PacketId packet_id = 0;
  std::uint32_t flow_id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  int hop_count = 0;
  int ttl = 0;       // remaining transmission attempts over the whole route
  int attempts = 0;  // failed attempts at the current holder
  std::int64_t created_slot = 0;
};

struct TrafficFlow {
  std::uint32_t flow_id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  double rate = 0.0;  // packets per slot, in (0, 1]
};

/// Monotone id allocator; ids are never reused within an episode.
class PacketIdSource {
 public:
  PacketId next() { return next_++; }
  PacketId issued() const { return next_; }

 private:
  PacketId next_ = 0;
};

/// Each flow emits one packet this slot with probability `rate`. One uniform draw per flow per slot.
inline std::vector<Packet> inject_traffic(std::span<const TrafficFlow> flows, std::int64_t slot, int ttl,
                                          PacketIdSource& ids, Rng& rng) {
  std::vector<Packet> out;
  for (const auto& f : flows) {
    if (uniform01(rng) < f.rate) {
      out.push_back(Packet{.packet_id = ids.next(),
                           .flow_id = f.flow_id,
                           .source = f.source,
                           .destination = f.destination,
                           .hop_count = 0,
                           .ttl = ttl,
                           .created_slot = slot});
    }
  }
  return out;
}

}  // namespace deepadmr::sim
