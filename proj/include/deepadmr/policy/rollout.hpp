#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/policy/actor_critic.hpp"
#include "deepadmr/policy/gae.hpp"
#include "deepadmr/routing/cq_tables.hpp"
#include "deepadmr/routing/observation.hpp"
#include "deepadmr/routing/reward.hpp"
#include "deepadmr/sim/network.hpp"

namespace deepadmr::policy {

struct RoutingConfig {
  std::size_t k_max = 8;
  routing::CqParams cq;
  routing::RewardWeights reward;

  void validate() const {
    if (k_max == 0) throw std::invalid_argument("routing: k_max must be >= 1");
    cq.validate();
    reward.validate();
  }
};

using ActionSelector = std::function<ActResult(const routing::Observation&, Rng&)>;

inline ActionSelector sampling_selector(const PolicyParams& p, ActMode mode = ActMode::Sample) {
  return [&p, mode](const routing::Observation& obs, Rng& rng) { return act(p, obs, rng, mode); };
}

inline ActionSelector uniform_selector() {
  return [](const routing::Observation& obs, Rng& rng) { return act_uniform(obs, rng); };
}

struct EpisodeResult {
  /// Per node, its decisions in slot order; the last one of each non-empty chain has done = true.
  std::vector<std::vector<Transition>> chains;
  sim::NetworkMetrics metrics;
  double total_reward = 0.0;
  std::size_t decisions = 0;
  std::size_t n_nodes = 0;
  std::int64_t t_max = 0;

  double mean_reward() const { return decisions ? total_reward / static_cast<double>(decisions) : 0.0; }

  /// All chains concatenated in node order, ready for compute_advantages.
  std::vector<Transition> flattened() const {
    std::vector<Transition> out;
    out.reserve(decisions);
    for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
    return out;
  }
};

/// Runs one episode. Every node holding a packet decides with the same selector (shared weights);
/// all transmissions of a slot happen before any C/Q update, and advertisements are read from
/// tables as they stood at the start of the slot.
inline EpisodeResult run_episode(const sim::EpisodeParams& params, const RoutingConfig& routing_cfg,
                                 const ActionSelector& select, Rng& policy_rng, sim::EventLog* log = nullptr) {
  using routing::Observation;
  sim::Network net(params, log);
  const std::size_t n = net.size();
  const std::size_t k = routing_cfg.k_max;

  std::vector<routing::CqTables> tables;
  tables.reserve(n);
  for (sim::NodeId i = 0; i < n; ++i) tables.emplace_back(n, i, routing_cfg.cq);
  std::vector<std::optional<routing::Action>> prev_action(n);
  std::vector<std::optional<Transition>> open(n);

  EpisodeResult result;
  result.chains.resize(n);
  result.n_nodes = n;
  result.t_max = params.t_max;

  struct Pending {
    Observation obs;
    ActResult choice;
    sim::NodeId destination = 0;
    sim::TransmitOutcome outcome;
  };
  std::vector<std::optional<Pending>> pending(n);
  std::vector<std::vector<routing::AckFeedback>> feedback(n);

  while (!net.finished()) {
    net.begin_slot();
    const std::int64_t slot = net.slot();

    for (sim::NodeId i = 0; i < n; ++i) {
      pending[i].reset();
      const sim::Packet* head = net.head(i);
      if (!head) continue;
      const auto nb = routing::select_neighbors(i, net.links(), net.positions(), k);
      Observation obs = routing::build_observation(tables[i], nb, prev_action[i], head->destination, k);
      if (open[i]) {
        open[i]->s_next = obs;
        open[i]->next_slot = slot;
        result.chains[i].push_back(std::move(*open[i]));
        open[i].reset();
      }
      ActResult choice = select(obs, policy_rng);
      pending[i] = Pending{std::move(obs), choice, head->destination, {}};
    }

    for (sim::NodeId i = 0; i < n; ++i) {
      if (!pending[i]) continue;
      pending[i]->outcome = net.transmit(i, routing::to_request(pending[i]->choice.action, pending[i]->obs));
    }

    // Advertisements first, from tables untouched this slot.
    for (sim::NodeId i = 0; i < n; ++i) {
      feedback[i].clear();
      if (!pending[i]) continue;
      const sim::NodeId d = pending[i]->destination;
      for (const auto& rx : pending[i]->outcome.receptions) {
        const double adv = rx.acked ? tables[rx.receiver].advertised_q(d, net.links().neighbors(rx.receiver)) : 0.0;
        feedback[i].push_back({rx.receiver, rx.acked, adv});
      }
    }

    for (sim::NodeId i = 0; i < n; ++i) {
      if (!pending[i]) {
        tables[i].tick();
        continue;
      }
      Pending& p = *pending[i];
      tables[i].update(feedback[i], p.destination);
      const double r = routing::compute_reward({p.outcome.ack_count, p.outcome.destination_acked}, routing_cfg.reward);
      result.total_reward += r;
      ++result.decisions;
      Transition tr;
      tr.s = std::move(p.obs);
      tr.action = p.choice.action.index();
      tr.logprob = p.choice.logprob;
      tr.reward = r;
      tr.node = i;
      tr.slot = slot;
      open[i] = std::move(tr);
      prev_action[i] = p.choice.action;
    }
    net.end_slot();
  }

  for (sim::NodeId i = 0; i < n; ++i) {
    if (!open[i]) continue;
    open[i]->done = true;
    open[i]->s_next.features.assign(open[i]->s.features.size(), 0.0);
    open[i]->s_next.action_mask.assign(open[i]->s.action_mask.size(), 0);
    open[i]->s_next.action_mask[0] = 1;
    open[i]->next_slot = params.t_max;
    result.chains[i].push_back(std::move(*open[i]));
  }
  result.metrics = net.metrics();
  return result;
}

}  // namespace deepadmr::policy
