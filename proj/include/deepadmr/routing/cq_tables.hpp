#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepadmr/sim/geometry.hpp"
#include "deepadmr/sim/transmit.hpp"

namespace deepadmr::routing {

using sim::NodeId;

struct CqParams {
  double beta_q = 0.3;   // Q smoothing step
  double beta_c = 0.2;   // C smoothing step
  double gamma_q = 0.95; // per-hop discount on the downstream estimate
  double c_init = 0.5;

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(beta_q) || !unit(beta_c) || !unit(gamma_q) || !unit(c_init))
      throw std::invalid_argument("CQ parameters must lie in [0,1]");
  }
};

/// Outcome of one targeted neighbor, as seen by the sender.
struct AckFeedback {
  NodeId neighbor = 0;
  bool acked = false;
  double advertised_q = 0.0;  // neighbor's best q toward the destination, piggybacked on its ACK
};

/// Node-local C/Q factors q(j,d), c(j,d) over next hop j and destination d, with the
/// previous-slot snapshot kept for deltas.
class CqTables {
 public:
  CqTables() = default;
  CqTables(std::size_t n, NodeId self, CqParams params = {})
      : n_(n), self_(self), params_(params), q_(n * n, 0.0), c_(n * n, params.c_init) {
    params_.validate();
    // A destination reaches itself with certainty.
    for (NodeId d = 0; d < n; ++d) q_[d * n + d] = 1.0;
    q_prev_ = q_;
    c_prev_ = c_;
  }

  std::size_t size() const { return n_; }
  NodeId self() const { return self_; }
  const CqParams& params() const { return params_; }

  double q(NodeId j, NodeId d) const { return q_[j * n_ + d]; }
  double c(NodeId j, NodeId d) const { return c_[j * n_ + d]; }
  double dq(NodeId j, NodeId d) const { return q_[j * n_ + d] - q_prev_[j * n_ + d]; }
  double dc(NodeId j, NodeId d) const { return c_[j * n_ + d] - c_prev_[j * n_ + d]; }

  /// Overwrites current entries (prev snapshot untouched). Values are clamped to [0,1].
  void set(NodeId j, NodeId d, double q, double c) {
    q_[j * n_ + d] = std::clamp(q, 0.0, 1.0);
    c_[j * n_ + d] = std::clamp(c, 0.0, 1.0);
  }

  /// Best q this node can offer toward `d` through `neighbors`; 1 when this node is `d`.
  double advertised_q(NodeId d, std::span<const NodeId> neighbors) const {
    if (d == self_) return 1.0;
    double best = 0.0;
    for (NodeId k : neighbors) best = std::max(best, q(k, d));
    return best;
  }

  /// Slot without a transmission: deltas become zero.
  void tick() {
    q_prev_ = q_;
    c_prev_ = c_;
  }

  /// Rotates the snapshot then applies ACK feedback for one transmission toward `destination`.
  void update(std::span<const AckFeedback> feedback, NodeId destination) {
    tick();
    const double bq = params_.beta_q;
    const double bc = params_.beta_c;
    for (const auto& fb : feedback) {
      if (fb.neighbor >= n_) continue;
      const std::size_t at = fb.neighbor * n_ + destination;
      if (fb.acked) {
        const double rho = fb.neighbor == destination ? 1.0 : 0.0;
        q_[at] = std::clamp((1.0 - bq) * q_[at] + bq * (rho + params_.gamma_q * fb.advertised_q), 0.0, 1.0);
        c_[at] = std::clamp((1.0 - bc) * c_[at] + bc * 1.0, 0.0, 1.0);
      } else {
        c_[at] = std::clamp((1.0 - bc) * c_[at], 0.0, 1.0);
      }
    }
  }

 private:
  std::size_t n_ = 0;
  NodeId self_ = 0;
  CqParams params_;
  std::vector<double> q_, c_, q_prev_, c_prev_;
};

/// Applies a transmission outcome. `advertised(j)` returns receiver j's advertisement toward
/// `destination`, evaluated on tables not yet updated this slot.
template <class AdvertisedFn>
void update_cq(CqTables& tables, const sim::TransmitOutcome& outcome, NodeId destination, AdvertisedFn&& advertised) {
  std::vector<AckFeedback> fb;
  fb.reserve(outcome.receptions.size());
  for (const auto& rx : outcome.receptions) {
    fb.push_back({rx.receiver, rx.acked, rx.acked ? advertised(rx.receiver) : 0.0});
  }
  tables.update(fb, destination);
}

}  // namespace deepadmr::routing
