#pragma once

#include <cstdint>
#include <deque>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/sim/channel.hpp"
#include "deepadmr/sim/dpd.hpp"
#include "deepadmr/sim/mobility.hpp"
#include "deepadmr/sim/packet.hpp"
#include "deepadmr/sim/scenario.hpp"
#include "deepadmr/sim/trace.hpp"
#include "deepadmr/sim/transmit.hpp"

namespace deepadmr::sim {

enum class PacketFate { Delivered, DroppedTtl, DroppedDuplicateEverywhere, InFlightAtTmax };

struct NetworkMetrics {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t delivered_hops = 0;

  double delivery_ratio() const { return injected ? static_cast<double>(delivered) / injected : 0.0; }
  double mean_hops() const { return delivered ? static_cast<double>(delivered_hops) / delivered : 0.0; }
  /// Transmissions per delivered packet; transmissions themselves when nothing arrived.
  double overhead() const {
    return delivered ? static_cast<double>(transmissions) / delivered : static_cast<double>(transmissions);
  }
};

/// Slotted MANET world for one episode.
///
/// Per slot: `begin_slot()` moves nodes, recomputes links and injects traffic; each node with a
/// queued packet may call `transmit()` once on its queue head; `end_slot()` hands accepted copies
/// to receivers and advances the clock. Copies received in slot t are forwardable from t+1.
/// A transmission that draws no ACK leaves the packet queued for a retry. Every attempt consumes
/// one unit of TTL; a copy whose TTL reaches 0 is dropped, and a copy that drew no ACK on
/// `max_attempts` consecutive attempts at one holder is discarded (nobody would take it).
class Network {
 public:
  explicit Network(EpisodeParams params, EventLog* log = nullptr)
      : p_(std::move(params)), rng_(p_.seed), log_(log), queues_(p_.n_nodes), tx_done_(p_.n_nodes, 0) {
    if (p_.n_nodes < 2) throw std::invalid_argument("Network needs N >= 2");
    p_.channel.validate(p_.t_max);
    dpd_.reserve(p_.n_nodes);
    for (std::size_t i = 0; i < p_.n_nodes; ++i) dpd_.emplace_back(p_.dpd_capacity);
    mobility_.resize(p_.n_nodes);
    positions_.resize(p_.n_nodes);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (auto& m : mobility_) {
      m.position = {uniform01(rng_) * p_.area.width, uniform01(rng_) * p_.area.height};
      m.speed = p_.mobility.mean_speed;
      m.mean_speed = p_.mobility.mean_speed;
      m.heading = angle(rng_);
      m.mean_heading = angle(rng_);
      m.memory = p_.mobility.memory;
    }
    sync_positions();
  }

  std::size_t size() const { return p_.n_nodes; }
  std::int64_t slot() const { return slot_; }
  std::int64_t t_max() const { return p_.t_max; }
  bool finished() const { return slot_ >= p_.t_max; }
  const EpisodeParams& params() const { return p_; }
  const ChannelModel& channel() const { return p_.channel; }
  const LinkGraph& links() const { return links_; }
  std::span<const Vec2> positions() const { return positions_; }
  const MobilityState& mobility(NodeId n) const { return mobility_[n]; }
  std::size_t queue_length(NodeId n) const { return queues_[n].size(); }

  const Packet* head(NodeId n) const { return queues_[n].empty() ? nullptr : &queues_[n].front(); }

  void begin_slot() {
    if (finished()) throw std::logic_error("episode already finished");
    if (slot_ > 0) {
      const MobilityNoise noise{p_.mobility.sigma_speed, p_.mobility.sigma_heading};
      for (auto& m : mobility_) m = step_mobility(m, noise, p_.area, rng_);
      sync_positions();
    }
    links_ = compute_links(positions_, p_.channel.comm_radius);
    std::fill(tx_done_.begin(), tx_done_.end(), 0);
    for (Packet& pkt : inject_traffic(p_.flows, slot_, p_.ttl, ids_, rng_)) {
      records_.push_back({});
      records_.back().live_copies = 1;
      ++metrics_.injected;
      dpd_[pkt.source].insert(pkt.packet_id);
      emit({slot_, pkt.source, EventKind::Inject, pkt.packet_id, static_cast<std::int64_t>(pkt.destination), 0});
      queues_[pkt.source].push_back(pkt);
    }
  }

  /// Sends the head of `sender`'s queue. At most one call per node per slot.
  TransmitOutcome transmit(NodeId sender, TxRequest request) {
    if (queues_[sender].empty()) throw std::logic_error("transmit: empty queue");
    if (tx_done_[sender]) throw std::logic_error("transmit: node already transmitted this slot");
    tx_done_[sender] = 1;
    Packet pkt = queues_[sender].front();
    TransmitOutcome out = sim::transmit(sender, request, pkt, links_, p_.channel, positions_, slot_, dpd_);
    ++metrics_.transmissions;
    emit({slot_, sender, EventKind::Transmit, pkt.packet_id,
          request.broadcast ? -1 : static_cast<std::int64_t>(request.target), out.ack_count});

    pkt.ttl -= 1;
    for (const auto& rx : out.receptions) {
      if (!rx.linked) continue;
      if (rx.jammed) {
        emit({slot_, rx.receiver, EventKind::Jammed, pkt.packet_id, static_cast<std::int64_t>(sender), 0});
        continue;
      }
      if (rx.duplicate) {
        emit({slot_, rx.receiver, EventKind::Duplicate, pkt.packet_id, static_cast<std::int64_t>(sender), 0});
        continue;
      }
      emit({slot_, rx.receiver, EventKind::Receive, pkt.packet_id, static_cast<std::int64_t>(sender), 0});
      if (!rx.acked)
        emit({slot_, sender, EventKind::AckLost, pkt.packet_id, static_cast<std::int64_t>(rx.receiver), 0});
      Packet copy = pkt;
      copy.hop_count += 1;
      copy.attempts = 0;
      if (rx.receiver == pkt.destination) {
        auto& rec = records_[pkt.packet_id];
        if (!rec.delivered) {
          rec.delivered = true;
          ++metrics_.delivered;
          metrics_.delivered_hops += static_cast<std::uint64_t>(copy.hop_count);
        }
        emit({slot_, rx.receiver, EventKind::Deliver, pkt.packet_id, static_cast<std::int64_t>(sender), copy.hop_count});
      } else {
        staged_.push_back({rx.receiver, copy});
        records_[pkt.packet_id].live_copies += 1;
      }
    }

    auto& q = queues_[sender];
    if (out.ack_count > 0) {
      q.pop_front();
      records_[pkt.packet_id].live_copies -= 1;
    } else if (pkt.ttl <= 0) {
      q.pop_front();
      drop_ttl(sender, pkt.packet_id);
    } else if (++q.front().attempts >= p_.max_attempts) {
      q.pop_front();
      auto& r = records_[pkt.packet_id];
      r.live_copies -= 1;
      emit({slot_, sender, EventKind::DropRetry, pkt.packet_id, -1, 0});
    } else {
      q.front().ttl = pkt.ttl;
    }
    return out;
  }

  void end_slot() {
    for (auto& [node, pkt] : staged_) {
      if (pkt.ttl <= 0) {
        drop_ttl(node, pkt.packet_id);
      } else {
        queues_[node].push_back(pkt);
      }
    }
    staged_.clear();
    ++slot_;
  }

  PacketFate fate(PacketId id) const {
    const auto& r = records_.at(id);
    if (r.delivered) return PacketFate::Delivered;
    if (r.live_copies > 0) return PacketFate::InFlightAtTmax;
    if (r.ttl_drops > 0) return PacketFate::DroppedTtl;
    return PacketFate::DroppedDuplicateEverywhere;
  }

  std::size_t packets_issued() const { return records_.size(); }
  const NetworkMetrics& metrics() const { return metrics_; }

 private:
  struct PacketRecord {
    bool delivered = false;
    int live_copies = 0;
    int ttl_drops = 0;
  };

  struct Staged {
    NodeId node;
    Packet packet;
  };

  void sync_positions() {
    for (std::size_t i = 0; i < mobility_.size(); ++i) positions_[i] = mobility_[i].position;
  }

  void drop_ttl(NodeId node, PacketId id) {
    auto& r = records_[id];
    r.live_copies -= 1;
    r.ttl_drops += 1;
    emit({slot_, node, EventKind::DropTtl, id, -1, 0});
  }

  void emit(Event e) {
    if (log_) log_->push_back(e);
  }

  EpisodeParams p_;
  Rng rng_;
  EventLog* log_;
  std::int64_t slot_ = 0;
  std::vector<MobilityState> mobility_;
  std::vector<Vec2> positions_;
  LinkGraph links_;
  std::vector<std::deque<Packet>> queues_;
  std::vector<DpdCache> dpd_;
  std::vector<std::uint8_t> tx_done_;
  std::vector<Staged> staged_;
  std::vector<PacketRecord> records_;
  PacketIdSource ids_;
  NetworkMetrics metrics_;
};

}  // namespace deepadmr::sim
