#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepadmr/policy/actor_critic.hpp"
#include "deepadmr/routing/observation.hpp"
#include "deepadmr/sim/geometry.hpp"

namespace deepadmr::policy {

/// One decision of one node: (s_t, a_t, r_t, s_{t+1}).
struct Transition {
  routing::Observation s;
  std::size_t action = 0;  // flat action index
  double logprob = 0.0;
  double reward = 0.0;
  routing::Observation s_next;  // zero features when `done`
  bool done = false;
  sim::NodeId node = 0;
  std::int64_t slot = 0;       // slot of the decision
  std::int64_t next_slot = 0;  // slot at which s_next was observed
};

struct AdvantageTarget {
  double advantage = 0.0;
  double ret = 0.0;  // critic regression target = advantage + V(s_t)
};

/// Generalized advantage estimation over concatenated chains; `dones[t]` closes a chain at t.
/// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}, delta_t = r_t + gamma*(1-done_t)*V(s_{t+1}) - V(s_t).
inline std::vector<AdvantageTarget> generalized_advantages(std::span<const double> rewards, std::span<const double> values,
                                                           std::span<const double> next_values,
                                                           std::span<const std::uint8_t> dones, double gamma,
                                                           double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n)
    throw std::invalid_argument("generalized_advantages: length mismatch");
  std::vector<AdvantageTarget> out(n);
  double carry = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double bootstrap = dones[t] ? 0.0 : gamma * next_values[t];
    const double delta = rewards[t] + bootstrap - values[t];
    const double follow = dones[t] || t + 1 == n ? 0.0 : gamma * lambda * carry;
    const double adv = delta + follow;
    out[t] = {adv, adv + values[t]};
    carry = adv;
  }
  return out;
}

/// Evaluates the critic on every transition, then runs GAE. Transitions must be grouped into
/// slot-ordered chains, each terminated by `done` or by a change of node.
inline std::vector<AdvantageTarget> compute_advantages(std::span<const Transition> traj, const ValueParams& critic,
                                                       double gamma, double lambda) {
  if (traj.empty()) return {};
  const std::size_t n = traj.size();
  const std::size_t dim = traj.front().s.features.size();
  MatrixXd states(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  MatrixXd next(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = traj[t].s.features[i];
      next(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          traj[t].s_next.features.empty() ? 0.0 : traj[t].s_next.features[i];
    }
  }
  const MatrixXd v = critic.net.forward(states);
  const MatrixXd v_next = critic.net.forward(next);
  std::vector<double> rewards(n), values(n), next_values(n);
  std::vector<std::uint8_t> dones(n);
  for (std::size_t t = 0; t < n; ++t) {
    rewards[t] = traj[t].reward;
    values[t] = v(0, static_cast<Eigen::Index>(t));
    next_values[t] = v_next(0, static_cast<Eigen::Index>(t));
    const bool chain_break = t + 1 < n && traj[t + 1].node != traj[t].node;
    dones[t] = traj[t].done ? 1 : 0;
    if (chain_break && !traj[t].done) throw std::invalid_argument("compute_advantages: chain ends without done");
  }
  return generalized_advantages(rewards, values, next_values, dones, gamma, lambda);
}

}  // namespace deepadmr::policy
