#pragma once

#include <stdexcept>

namespace deepadmr::routing {

struct RewardWeights {
  double w1 = 1.0;  // exactly one ACK
  double w2 = 1.0;  // per surplus ACK
  double w3 = 1.0;  // no ACK
  double w4 = 5.0;  // delivered to destination and ACKed by it

  void validate() const {
    if (!(w1 > 0.0 && w2 > 0.0 && w3 > 0.0 && w4 > 0.0))
      throw std::invalid_argument("reward weights must all be > 0");
  }
};

struct RewardInputs {
  int n_prev = 0;               // ACKs observed for the previous action
  bool delivered_prev = false;  // previous action delivered to the destination and was ACKed by it
};

/// Local per-node reward: w1[n=1] - w2[n>1](n-1) - w3[n=0] + w4[D].
inline double compute_reward(const RewardInputs& in, const RewardWeights& w) {
  if (in.n_prev < 0) throw std::invalid_argument("compute_reward: negative ACK count");
  double r = 0.0;
  if (in.n_prev == 1) {
    r += w.w1;
  } else if (in.n_prev > 1) {
    r -= w.w2 * static_cast<double>(in.n_prev - 1);
  } else {
    r -= w.w3;
  }
  if (in.delivered_prev) r += w.w4;
  return r;
}

}  // namespace deepadmr::routing
