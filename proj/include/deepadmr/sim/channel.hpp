#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepadmr/sim/geometry.hpp"

namespace deepadmr::sim {

enum class JamMode {
  SuppressAck,  // the covered node cannot decode ACKs addressed to it
  SuppressAll,  // the covered node neither receives data nor decodes ACKs
};

/// Closed slot interval [first, last].
struct SlotWindow {
  std::int64_t first = 0;
  std::int64_t last = 0;

  bool contains(std::int64_t slot) const { return slot >= first && slot <= last; }
};

struct JammerConfig {
  Vec2 position;
  double jam_radius = 0.0;
  SlotWindow active_window;
  JamMode mode = JamMode::SuppressAck;
  /// When set the jammer rides along with this node (position is then an offset).
  std::optional<NodeId> follow_node;

  Vec2 location(std::span<const Vec2> node_positions) const {
    if (!follow_node) return position;
    const Vec2 anchor = node_positions[*follow_node];
    return {anchor.x + position.x, anchor.y + position.y};
  }

  bool active(std::int64_t slot) const { return active_window.contains(slot); }

  bool covers(Vec2 p, std::span<const Vec2> node_positions) const {
    return distance(location(node_positions), p) <= jam_radius;
  }
};

struct ChannelModel {
  double comm_radius = 0.0;
  std::vector<JammerConfig> jammers;

  void validate(std::int64_t t_max) const {
    if (!(comm_radius > 0.0)) throw std::invalid_argument("comm_radius must be > 0");
    for (const auto& j : jammers) {
      if (!(j.jam_radius > 0.0)) throw std::invalid_argument("jam_radius must be > 0");
      if (j.active_window.first < 0 || j.active_window.last > t_max || j.active_window.first > j.active_window.last)
        throw std::invalid_argument("jammer active_window must lie within [0, T_max]");
    }
  }

  /// True if node `n` cannot decode ACKs this slot.
  bool ack_suppressed(NodeId n, std::span<const Vec2> positions, std::int64_t slot) const {
    for (const auto& j : jammers)
      if (j.active(slot) && j.covers(positions[n], positions)) return true;
    return false;
  }

  /// True if node `n` cannot receive data frames this slot.
  bool reception_suppressed(NodeId n, std::span<const Vec2> positions, std::int64_t slot) const {
    for (const auto& j : jammers)
      if (j.mode == JamMode::SuppressAll && j.active(slot) && j.covers(positions[n], positions)) return true;
    return false;
  }

  bool any_active(std::int64_t slot) const {
    for (const auto& j : jammers)
      if (j.active(slot)) return true;
    return false;
  }
};

/// Undirected unit-disk connectivity for one slot.
class LinkGraph {
 public:
  LinkGraph() = default;
  explicit LinkGraph(std::size_t n) : n_(n), adjacency_(n * n, 0), neighbors_(n) {}

  std::size_t size() const { return n_; }
  bool linked(NodeId a, NodeId b) const { return adjacency_[a * n_ + b] != 0; }

  /// Neighbors of `a` in ascending id order.
  std::span<const NodeId> neighbors(NodeId a) const { return neighbors_[a]; }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& nb : neighbors_) e += nb.size();
    return e / 2;
  }

  void connect(NodeId a, NodeId b) {
    adjacency_[a * n_ + b] = 1;
    adjacency_[b * n_ + a] = 1;
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<NodeId>> neighbors_;
};

/// Links every pair whose distance is at most `comm_radius` (closed disk).
inline LinkGraph compute_links(std::span<const Vec2> positions, double comm_radius) {
  LinkGraph g(positions.size());
  for (NodeId a = 0; a < positions.size(); ++a)
    for (NodeId b = a + 1; b < positions.size(); ++b)
      if (distance(positions[a], positions[b]) <= comm_radius) g.connect(a, b);
  return g;
}

}  // namespace deepadmr::sim
