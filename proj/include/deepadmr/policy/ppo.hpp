#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepadmr/common/random.hpp"
#include "deepadmr/policy/actor_critic.hpp"
#include "deepadmr/policy/adam.hpp"
#include "deepadmr/policy/gae.hpp"

namespace deepadmr::policy {

/// Non-finite gradient or parameter encountered during an update.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PpoHyperparams {
  double gamma = 0.5;
  double lambda = 0.0;
  double clip = 0.2;
  std::size_t epochs = 4;
  std::size_t minibatch = 256;
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  /// The detector relies on the critic's one-step TD error, so this build pins lambda to 0.
  bool td0_only = true;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("PPO: gamma must be in (0,1)");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("PPO: lambda must be in [0,1]");
    if (td0_only && lambda != 0.0) throw std::invalid_argument("PPO: lambda must be 0 for the anomaly-detection build");
    if (!(clip > 0.0)) throw std::invalid_argument("PPO: clip must be > 0");
    if (epochs == 0 || minibatch == 0) throw std::invalid_argument("PPO: epochs and minibatch must be positive");
    if (lr_actor < 0.0 || lr_critic < 0.0 || entropy_coef < 0.0)
      throw std::invalid_argument("PPO: learning rates and entropy coefficient must be >= 0");
  }
};

/// Column-major training batch: one column per transition.
struct PpoBatch {
  MatrixXd obs;                      // obs_dim x B
  std::vector<std::uint8_t> masks;   // n_actions x B
  std::vector<std::size_t> actions;  // B
  VectorXd old_logprob;              // B
  VectorXd advantages;               // B (normalized when built by make_batch)
  VectorXd returns;                  // B
  std::size_t n_actions = 0;

  std::size_t size() const { return actions.size(); }
  std::span<const std::uint8_t> mask(std::size_t i) const { return {masks.data() + i * n_actions, n_actions}; }
};

inline PpoBatch make_batch(std::span<const Transition> traj, std::span<const AdvantageTarget> targets,
                           bool normalize_advantages = true) {
  if (traj.size() != targets.size()) throw std::invalid_argument("make_batch: length mismatch");
  PpoBatch b;
  const std::size_t n = traj.size();
  if (n == 0) return b;
  const std::size_t dim = traj.front().s.features.size();
  b.n_actions = traj.front().s.action_mask.size();
  b.obs.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  b.masks.resize(b.n_actions * n);
  b.actions.resize(n);
  b.old_logprob.resize(static_cast<Eigen::Index>(n));
  b.advantages.resize(static_cast<Eigen::Index>(n));
  b.returns.resize(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const auto e = static_cast<Eigen::Index>(t);
    for (std::size_t i = 0; i < dim; ++i) b.obs(static_cast<Eigen::Index>(i), e) = traj[t].s.features[i];
    std::copy(traj[t].s.action_mask.begin(), traj[t].s.action_mask.end(), b.masks.begin() + t * b.n_actions);
    b.actions[t] = traj[t].action;
    b.old_logprob(e) = traj[t].logprob;
    b.advantages(e) = targets[t].advantage;
    b.returns(e) = targets[t].ret;
  }
  if (normalize_advantages && n > 1) {
    const double mean = b.advantages.mean();
    const double var = (b.advantages.array() - mean).square().mean();
    b.advantages = ((b.advantages.array() - mean) / (std::sqrt(var) + 1e-8)).matrix();
  }
  return b;
}

struct LossAndGrad {
  double loss = 0.0;
  VectorXd grad;
  double entropy = 0.0;        // mean policy entropy
  double clip_fraction = 0.0;  // share of samples on a saturated clip branch
  double approx_kl = 0.0;      // mean(old_logp - new_logp)
};

/// Negated clipped surrogate minus the entropy bonus, averaged over `idx`, and its gradient.
inline LossAndGrad surrogate_loss(const Mlp& actor, const PpoBatch& batch, std::span<const std::size_t> idx, double clip,
                                  double entropy_coef) {
  const std::size_t m = idx.size();
  if (m == 0) throw std::invalid_argument("surrogate_loss: empty minibatch");
  MatrixXd x(batch.obs.rows(), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) x.col(static_cast<Eigen::Index>(i)) = batch.obs.col(static_cast<Eigen::Index>(idx[i]));
  Mlp::Tape tape;
  const MatrixXd logit = actor.forward(x, tape);
  MatrixXd d_logit = MatrixXd::Zero(logit.rows(), logit.cols());
  const double inv_m = 1.0 / static_cast<double>(m);

  LossAndGrad out;
  double surrogate_sum = 0.0, entropy_sum = 0.0, kl_sum = 0.0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t b = idx[i];
    const auto col = static_cast<Eigen::Index>(i);
    std::span<const double> l(logit.col(col).data(), static_cast<std::size_t>(logit.rows()));
    const auto mask = batch.mask(b);
    const auto lp = masked_log_softmax(l, mask);
    const std::size_t a = batch.actions[b];
    const double adv = batch.advantages(static_cast<Eigen::Index>(b));
    const double ratio = std::exp(lp[a] - batch.old_logprob(static_cast<Eigen::Index>(b)));
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    surrogate_sum += std::min(ratio * adv, clipped_ratio * adv);
    kl_sum += batch.old_logprob(static_cast<Eigen::Index>(b)) - lp[a];
    // Gradient flows through the ratio only while the unclipped term is the active minimum.
    const bool saturated = (adv > 0.0 && ratio >= 1.0 + clip) || (adv < 0.0 && ratio <= 1.0 - clip);
    if (saturated) ++clipped;
    const double d_logp = saturated ? 0.0 : -ratio * adv * inv_m;

    double h = 0.0;
    for (std::size_t j = 0; j < lp.size(); ++j)
      if (mask[j]) h -= std::exp(lp[j]) * lp[j];
    entropy_sum += h;
    for (std::size_t j = 0; j < lp.size(); ++j) {
      if (!mask[j]) continue;
      const double p = std::exp(lp[j]);
      const double onehot = j == a ? 1.0 : 0.0;
      // d(logp_a)/dz_j = 1[j=a] - p_j ; d(H)/dz_j = -p_j (log p_j + H)
      d_logit(static_cast<Eigen::Index>(j), col) = d_logp * (onehot - p) + entropy_coef * inv_m * p * (lp[j] + h);
    }
  }
  out.loss = -surrogate_sum * inv_m - entropy_coef * entropy_sum * inv_m;
  out.entropy = entropy_sum * inv_m;
  out.clip_fraction = static_cast<double>(clipped) * inv_m;
  out.approx_kl = kl_sum * inv_m;
  out.grad = actor.backward(tape, d_logit);
  return out;
}

/// 0.5 * mean (V(s) - return)^2 over `idx`, and its gradient.
inline LossAndGrad value_loss(const Mlp& critic, const PpoBatch& batch, std::span<const std::size_t> idx) {
  const std::size_t m = idx.size();
  if (m == 0) throw std::invalid_argument("value_loss: empty minibatch");
  MatrixXd x(batch.obs.rows(), static_cast<Eigen::Index>(m));
  MatrixXd target(1, static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    x.col(static_cast<Eigen::Index>(i)) = batch.obs.col(static_cast<Eigen::Index>(idx[i]));
    target(0, static_cast<Eigen::Index>(i)) = batch.returns(static_cast<Eigen::Index>(idx[i]));
  }
  Mlp::Tape tape;
  const MatrixXd v = critic.forward(x, tape);
  const MatrixXd err = v - target;
  const double inv_m = 1.0 / static_cast<double>(m);
  LossAndGrad out;
  out.loss = 0.5 * err.squaredNorm() * inv_m;
  out.grad = critic.backward(tape, err * inv_m);
  return out;
}

/// Adam moments for both networks; persists across iterations.
struct PpoOptimizer {
  Adam actor;
  Adam critic;

  PpoOptimizer() = default;
  PpoOptimizer(const PolicyParams& p, const ValueParams& v, const PpoHyperparams& hp)
      : actor(p.net.params().size(), AdamConfig{.learning_rate = hp.lr_actor}),
        critic(v.net.params().size(), AdamConfig{.learning_rate = hp.lr_critic}) {}
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  std::size_t minibatches = 0;
};

namespace detail {

inline void check_finite(const VectorXd& g, const char* what) {
  if (!g.allFinite())
    throw NumericalError(std::string("non-finite ") + what +
                         " gradient; the learning rate or reward scale is likely misconfigured");
}

inline void clip_norm(VectorXd& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double n = g.norm();
  if (n > max_norm) g *= max_norm / n;
}

}  // namespace detail

/// Minibatch passes of the clipped surrogate (actor) and squared-error value loss (critic).
/// Throws NumericalError and leaves the parameters of the failing minibatch untouched on NaN/Inf.
inline UpdateStats ppo_update(PolicyParams& actor, ValueParams& critic, PpoOptimizer& opt, const PpoBatch& batch,
                              const PpoHyperparams& hp, Rng& rng) {
  if (batch.size() == 0) throw std::invalid_argument("ppo_update: empty batch");
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  UpdateStats stats;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += hp.minibatch) {
      const std::size_t end = std::min(order.size(), start + hp.minibatch);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      auto pl = surrogate_loss(actor.net, batch, idx, hp.clip, hp.entropy_coef);
      auto vl = value_loss(critic.net, batch, idx);
      detail::check_finite(pl.grad, "policy");
      detail::check_finite(vl.grad, "value");
      detail::clip_norm(pl.grad, hp.max_grad_norm);
      detail::clip_norm(vl.grad, hp.max_grad_norm);
      opt.actor.step(actor.net.params(), pl.grad);
      opt.critic.step(critic.net.params(), vl.grad);
      if (!actor.net.params().allFinite() || !critic.net.params().allFinite())
        throw NumericalError("parameters became non-finite after an update step");
      stats.policy_loss += pl.loss;
      stats.value_loss += vl.loss;
      stats.entropy += pl.entropy;
      stats.clip_fraction += pl.clip_fraction;
      stats.approx_kl += pl.approx_kl;
      ++stats.minibatches;
    }
  }
  const double k = static_cast<double>(stats.minibatches);
  stats.policy_loss /= k;
  stats.value_loss /= k;
  stats.entropy /= k;
  stats.clip_fraction /= k;
  stats.approx_kl /= k;
  return stats;
}

}  // namespace deepadmr::policy
