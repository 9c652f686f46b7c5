#pragma once

#include <cstdint>
#include <vector>

#include "deepadmr/policy/actor_critic.hpp"
#include "deepadmr/policy/gae.hpp"
#include "deepadmr/policy/rollout.hpp"

namespace deepadmr::monitor {

using sim::NodeId;

/// One TD error, stamped with the node and the slot at which it became observable.
struct TdSample {
  NodeId node = 0;
  std::int64_t slot = 0;
  double delta = 0.0;
};

/// delta = V(s) - r - gamma V(s'); the bootstrap term is dropped when `done`.
inline double td_error(double v_s, double reward, double v_next, double gamma, bool done) {
  return v_s - reward - (done ? 0.0 : gamma * v_next);
}

inline double td_error(const policy::ValueParams& critic, const routing::Observation& s, double reward,
                       const routing::Observation& s_next, bool done, double gamma) {
  const double v_next = done ? 0.0 : policy::value(critic, s_next);
  return td_error(policy::value(critic, s), reward, v_next, gamma, done);
}

/// Per-node TD-error streams of one episode, each ordered by slot. A decision taken at slot t is
/// scored once the node's next observation exists, so samples carry the transition's `next_slot`.
inline std::vector<std::vector<TdSample>> td_streams(const policy::EpisodeResult& episode,
                                                     const policy::ValueParams& critic, double gamma) {
  std::vector<std::vector<TdSample>> out(episode.chains.size());
  for (std::size_t node = 0; node < episode.chains.size(); ++node) {
    const auto& chain = episode.chains[node];
    if (chain.empty()) continue;
    const auto dim = static_cast<Eigen::Index>(chain.front().s.features.size());
    const auto n = static_cast<Eigen::Index>(chain.size());
    policy::MatrixXd states(dim, n), next(dim, n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& tr = chain[static_cast<std::size_t>(t)];
      for (Eigen::Index i = 0; i < dim; ++i) {
        states(i, t) = tr.s.features[static_cast<std::size_t>(i)];
        next(i, t) = tr.s_next.features.empty() ? 0.0 : tr.s_next.features[static_cast<std::size_t>(i)];
      }
    }
    const policy::MatrixXd v = critic.net.forward(states);
    const policy::MatrixXd v_next = critic.net.forward(next);
    out[node].reserve(chain.size());
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& tr = chain[static_cast<std::size_t>(t)];
      out[node].push_back({node, tr.next_slot, td_error(v(0, t), tr.reward, v_next(0, t), gamma, tr.done)});
    }
  }
  return out;
}

}  // namespace deepadmr::monitor
