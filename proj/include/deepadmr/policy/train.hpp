#pragma once

#include <functional>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/policy/gae.hpp"
#include "deepadmr/policy/ppo.hpp"
#include "deepadmr/policy/rollout.hpp"
#include "deepadmr/sim/scenario.hpp"

namespace deepadmr::policy {

struct TrainingConfig {
  std::size_t iterations = 50;
  std::size_t episodes_per_iteration = 2;
  std::size_t hidden = 64;
  std::uint64_t seed = 1;
  PpoHyperparams ppo;

  void validate() const {
    if (episodes_per_iteration == 0) throw std::invalid_argument("training: episodes_per_iteration must be >= 1");
    if (hidden == 0) throw std::invalid_argument("training: hidden must be >= 1");
    ppo.validate();
  }
};

struct IterationLog {
  std::size_t iteration = 0;
  std::size_t transitions = 0;
  double mean_reward = 0.0;          // per decision
  double mean_episode_reward = 0.0;  // summed over all nodes of an episode
  double delivery_ratio = 0.0;
  double overhead = 0.0;
  UpdateStats update;
};

struct ActorCritic {
  PolicyParams actor;
  ValueParams critic;
};

inline ActorCritic initialize_model(std::size_t k_max, std::size_t hidden, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xA11CE));
  const std::size_t dim = routing::observation_size(k_max);
  ActorCritic m;
  m.actor = make_policy(dim, routing::action_count(k_max), hidden, rng);
  m.critic = make_value(dim, hidden, rng);
  return m;
}

/// Centralized training of the shared actor/critic: every iteration rolls out
/// `episodes_per_iteration` nominal episodes, pools all agents' transitions and runs one PPO update.
inline ActorCritic train(const sim::ScenarioConfig& family, const RoutingConfig& routing_cfg, const TrainingConfig& cfg,
                         const std::function<void(const IterationLog&)>& on_iteration = {}) {
  cfg.validate();
  routing_cfg.validate();
  if (!family.nominal()) throw std::invalid_argument("train: the scenario family must be anomaly-free");
  ActorCritic model = initialize_model(routing_cfg.k_max, cfg.hidden, cfg.seed);
  PpoOptimizer opt(model.actor, model.critic, cfg.ppo);
  Rng policy_rng(derive_seed(cfg.seed, 0xB0B));
  Rng update_rng(derive_seed(cfg.seed, 0xC0DE));

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<Transition> batch_traj;
    IterationLog log;
    log.iteration = it;
    double delivered = 0.0, injected = 0.0, tx = 0.0;
    for (std::size_t e = 0; e < cfg.episodes_per_iteration; ++e) {
      const auto ep = sim::resolve_episode(family, it * cfg.episodes_per_iteration + e);
      auto res = run_episode(ep, routing_cfg, sampling_selector(model.actor), policy_rng);
      log.mean_episode_reward += res.total_reward;
      delivered += static_cast<double>(res.metrics.delivered);
      injected += static_cast<double>(res.metrics.injected);
      tx += static_cast<double>(res.metrics.transmissions);
      auto flat = res.flattened();
      batch_traj.insert(batch_traj.end(), std::make_move_iterator(flat.begin()), std::make_move_iterator(flat.end()));
    }
    log.mean_episode_reward /= static_cast<double>(cfg.episodes_per_iteration);
    log.delivery_ratio = injected > 0 ? delivered / injected : 0.0;
    log.overhead = delivered > 0 ? tx / delivered : tx;
    log.transitions = batch_traj.size();
    for (const auto& t : batch_traj) log.mean_reward += t.reward;
    if (!batch_traj.empty()) {
      log.mean_reward /= static_cast<double>(batch_traj.size());
      const auto targets = compute_advantages(batch_traj, model.critic, cfg.ppo.gamma, cfg.ppo.lambda);
      const auto batch = make_batch(batch_traj, targets);
      log.update = ppo_update(model.actor, model.critic, opt, batch, cfg.ppo, update_rng);
    }
    if (on_iteration) on_iteration(log);
  }
  return model;
}

}  // namespace deepadmr::policy
