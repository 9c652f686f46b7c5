#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <unordered_set>

#include "deepadmr/sim/packet.hpp"

namespace deepadmr::sim {

/// Duplicate packet detection: bounded set of seen ids with FIFO eviction.
class DpdCache {
 public:
  explicit DpdCache(std::size_t capacity = 4096) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("DPD capacity must be positive");
  }

  /// Returns false (and leaves the cache untouched) if `id` is already present.
  bool insert(PacketId id) {
    if (seen_.contains(id)) return false;
    if (order_.size() == capacity_) {
      seen_.erase(order_.front());
      order_.pop_front();
    }
    seen_.insert(id);
    order_.push_back(id);
    return true;
  }

  bool contains(PacketId id) const { return seen_.contains(id); }
  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::unordered_set<PacketId> seen_;
  std::deque<PacketId> order_;
};

}  // namespace deepadmr::sim
