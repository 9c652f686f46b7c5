#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepadmr/routing/action.hpp"
#include "deepadmr/routing/cq_tables.hpp"
#include "deepadmr/sim/channel.hpp"

namespace deepadmr::routing {

/// Policy input for one node and one destination:
/// [c(K) | q(K) | dc(K) | dq(K) | one-hot previous action (K+1)].
struct Observation {
  std::vector<double> features;
  std::vector<std::uint8_t> action_mask;  // K+1 entries, index 0 = BROADCAST (always valid)
  std::vector<NodeId> neighbors;          // slot -> node id, ascending

  std::size_t k_max() const { return action_mask.empty() ? 0 : action_mask.size() - 1; }
};

constexpr std::size_t observation_size(std::size_t k_max) { return 4 * k_max + action_count(k_max); }

/// Up to `k_max` neighbors of `self`, nearest first for truncation, returned in ascending id order.
inline std::vector<NodeId> select_neighbors(NodeId self, const sim::LinkGraph& links,
                                            std::span<const sim::Vec2> positions, std::size_t k_max) {
  std::vector<NodeId> nb(links.neighbors(self).begin(), links.neighbors(self).end());
  if (nb.size() > k_max) {
    std::stable_sort(nb.begin(), nb.end(), [&](NodeId a, NodeId b) {
      return sim::distance(positions[self], positions[a]) < sim::distance(positions[self], positions[b]);
    });
    nb.resize(k_max);
    std::sort(nb.begin(), nb.end());
  }
  return nb;
}

inline Observation build_observation(const CqTables& tables, std::span<const NodeId> neighbors,
                                     std::optional<Action> prev_action, NodeId destination, std::size_t k_max) {
  if (neighbors.size() > k_max) throw std::invalid_argument("build_observation: more neighbors than K_max");
  if (!std::is_sorted(neighbors.begin(), neighbors.end()))
    throw std::invalid_argument("build_observation: neighbors must be in ascending id order");
  Observation obs;
  obs.features.assign(observation_size(k_max), 0.0);
  obs.action_mask.assign(action_count(k_max), 0);
  obs.action_mask[0] = 1;
  obs.neighbors.assign(neighbors.begin(), neighbors.end());
  for (std::size_t s = 0; s < neighbors.size(); ++s) {
    const NodeId j = neighbors[s];
    obs.features[s] = tables.c(j, destination);
    obs.features[k_max + s] = tables.q(j, destination);
    obs.features[2 * k_max + s] = tables.dc(j, destination);
    obs.features[3 * k_max + s] = tables.dq(j, destination);
    obs.action_mask[s + 1] = 1;
  }
  if (prev_action) {
    const std::size_t a = prev_action->index();
    if (a >= action_count(k_max)) throw std::invalid_argument("build_observation: previous action out of range");
    obs.features[4 * k_max + a] = 1.0;
  }
  return obs;
}

/// Maps a routing action to the physical request for this observation's neighbor list.
inline sim::TxRequest to_request(const Action& a, const Observation& obs) {
  if (a.is_broadcast()) return sim::TxRequest::to_all();
  if (a.slot >= obs.neighbors.size()) throw std::invalid_argument("unicast slot is not a valid neighbor");
  return sim::TxRequest::to(obs.neighbors[a.slot]);
}

}  // namespace deepadmr::routing
