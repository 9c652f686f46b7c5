#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/policy/mlp.hpp"
#include "deepadmr/routing/action.hpp"
#include "deepadmr/routing/observation.hpp"

namespace deepadmr::policy {

/// Shared actor: observation -> logits over K_max+1 actions.
struct PolicyParams {
  Mlp net;
};

/// Shared critic: observation -> V(s).
struct ValueParams {
  Mlp net;
};

inline PolicyParams make_policy(std::size_t obs_dim, std::size_t n_actions, std::size_t hidden, Rng& rng) {
  PolicyParams p{Mlp({obs_dim, hidden, hidden, n_actions})};
  p.net.initialize(rng, 0.01);
  return p;
}

inline ValueParams make_value(std::size_t obs_dim, std::size_t hidden, Rng& rng) {
  ValueParams v{Mlp({obs_dim, hidden, hidden, 1})};
  v.net.initialize(rng, 1.0);
  return v;
}

/// log-softmax restricted to valid entries; invalid entries get -inf (probability exactly 0).
inline std::vector<double> masked_log_softmax(std::span<const double> logits, std::span<const std::uint8_t> mask) {
  if (logits.size() != mask.size()) throw std::invalid_argument("masked_log_softmax: size mismatch");
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  double top = neg_inf;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) top = std::max(top, logits[i]);
  if (top == neg_inf) throw std::invalid_argument("masked_log_softmax: no valid action");
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) sum += std::exp(logits[i] - top);
  const double log_z = top + std::log(sum);
  std::vector<double> out(logits.size(), neg_inf);
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) out[i] = logits[i] - log_z;
  return out;
}

enum class ActMode { Sample, Greedy };

struct ActResult {
  routing::Action action;
  double logprob = 0.0;
};

inline MatrixXd as_column(std::span<const double> x) {
  MatrixXd m(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = x[i];
  return m;
}

inline std::vector<double> logits(const PolicyParams& p, std::span<const double> features) {
  const MatrixXd out = p.net.forward(as_column(features));
  return {out.data(), out.data() + out.size()};
}

/// Draws from the masked categorical policy (or takes its mode) and reports the exact log-probability.
inline ActResult act(const PolicyParams& p, const routing::Observation& obs, Rng& rng, ActMode mode = ActMode::Sample) {
  const auto lp = masked_log_softmax(logits(p, obs.features), obs.action_mask);
  std::size_t chosen = 0;
  if (mode == ActMode::Greedy) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lp.size(); ++i)
      if (obs.action_mask[i] && lp[i] > best) {
        best = lp[i];
        chosen = i;
      }
  } else {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_valid = 0;
    bool picked = false;
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (!obs.action_mask[i]) continue;
      last_valid = i;
      acc += std::exp(lp[i]);
      if (u < acc) {
        chosen = i;
        picked = true;
        break;
      }
    }
    if (!picked) chosen = last_valid;  // u landed in the rounding gap above the summed mass
  }
  return {routing::Action::from_index(chosen), lp[chosen]};
}

/// Uniform choice over valid actions; the baseline policy.
inline ActResult act_uniform(const routing::Observation& obs, Rng& rng) {
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < obs.action_mask.size(); ++i)
    if (obs.action_mask[i]) valid.push_back(i);
  if (valid.empty()) throw std::invalid_argument("act_uniform: no valid action");
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng);
  return {routing::Action::from_index(valid[pick]), -std::log(static_cast<double>(valid.size()))};
}

inline double value(const ValueParams& v, std::span<const double> features) {
  return v.net.forward(as_column(features))(0, 0);
}

inline double value(const ValueParams& v, const routing::Observation& obs) { return value(v, obs.features); }

}  // namespace deepadmr::policy
