#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepadmr/policy/train.hpp"

namespace deepadmr::policy {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trained actor/critic plus every setting needed to run and score them again.
struct Checkpoint {
  ActorCritic model;
  RoutingConfig routing;
  TrainingConfig training;
};

inline constexpr int checkpoint_version = 1;

namespace detail {

using nlohmann::json;

inline json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weight(l);
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
    const auto b = net.bias(l);
    layers.push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"weight", row_major},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return {{"sizes", net.sizes()}, {"layers", layers}};
}

inline Mlp mlp_from_json(const json& j, const std::vector<std::size_t>& expected, const char* what) {
  const auto sizes = j.at("sizes").get<std::vector<std::size_t>>();
  if (sizes != expected) {
    std::string got, want;
    for (auto s : sizes) got += (got.empty() ? "" : "x") + std::to_string(s);
    for (auto s : expected) want += (want.empty() ? "" : "x") + std::to_string(s);
    throw CheckpointError(std::string(what) + ": layer shape " + got + " does not match expected " + want);
  }
  Mlp net(sizes);
  const auto& layers = j.at("layers");
  if (!layers.is_array() || layers.size() != net.layer_count())
    throw CheckpointError(std::string(what) + ": wrong number of layers");
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& L = layers[l];
    const auto rows = L.at("rows").get<std::size_t>();
    const auto cols = L.at("cols").get<std::size_t>();
    const auto w = L.at("weight").get<std::vector<double>>();
    const auto b = L.at("bias").get<std::vector<double>>();
    if (rows != net.out_dim(l) || cols != net.in_dim(l) || w.size() != rows * cols || b.size() != rows)
      throw CheckpointError(std::string(what) + ": layer " + std::to_string(l) + " has inconsistent dimensions");
    auto W = net.weight(l);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r * cols + c];
    auto B = net.bias(l);
    for (std::size_t r = 0; r < rows; ++r) B(static_cast<Eigen::Index>(r)) = b[r];
  }
  if (!net.params().allFinite()) throw CheckpointError(std::string(what) + ": non-finite weights");
  return net;
}

}  // namespace detail

inline nlohmann::json routing_to_json(const RoutingConfig& r) {
  return {{"k_max", r.k_max},
          {"cq", {{"beta_q", r.cq.beta_q}, {"beta_c", r.cq.beta_c}, {"gamma_q", r.cq.gamma_q}, {"c_init", r.cq.c_init}}},
          {"reward", {{"w1", r.reward.w1}, {"w2", r.reward.w2}, {"w3", r.reward.w3}, {"w4", r.reward.w4}}}};
}

inline nlohmann::json ppo_to_json(const PpoHyperparams& p) {
  return {{"gamma", p.gamma},     {"lambda", p.lambda},       {"clip", p.clip},
          {"epochs", p.epochs},   {"minibatch", p.minibatch}, {"lr_actor", p.lr_actor},
          {"lr_critic", p.lr_critic}, {"entropy_coef", p.entropy_coef}, {"max_grad_norm", p.max_grad_norm}};
}

inline nlohmann::json checkpoint_to_json(const Checkpoint& ck) {
  return {{"format", "deepadmr-checkpoint"},
          {"version", checkpoint_version},
          {"routing", routing_to_json(ck.routing)},
          {"training",
           {{"iterations", ck.training.iterations},
            {"episodes_per_iteration", ck.training.episodes_per_iteration},
            {"hidden", ck.training.hidden},
            {"seed", ck.training.seed},
            {"ppo", ppo_to_json(ck.training.ppo)}}},
          {"actor", detail::mlp_to_json(ck.model.actor.net)},
          {"critic", detail::mlp_to_json(ck.model.critic.net)}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "deepadmr-checkpoint") throw CheckpointError("not a checkpoint file");
    if (j.at("version").get<int>() != checkpoint_version)
      throw CheckpointError("unsupported checkpoint version " + j.at("version").dump());
    Checkpoint ck;
    const auto& r = j.at("routing");
    ck.routing.k_max = r.at("k_max").get<std::size_t>();
    const auto& cq = r.at("cq");
    ck.routing.cq = {cq.at("beta_q").get<double>(), cq.at("beta_c").get<double>(), cq.at("gamma_q").get<double>(),
                     cq.at("c_init").get<double>()};
    const auto& w = r.at("reward");
    ck.routing.reward = {w.at("w1").get<double>(), w.at("w2").get<double>(), w.at("w3").get<double>(),
                         w.at("w4").get<double>()};
    const auto& t = j.at("training");
    ck.training.iterations = t.at("iterations").get<std::size_t>();
    ck.training.episodes_per_iteration = t.at("episodes_per_iteration").get<std::size_t>();
    ck.training.hidden = t.at("hidden").get<std::size_t>();
    ck.training.seed = t.at("seed").get<std::uint64_t>();
    const auto& p = t.at("ppo");
    auto& hp = ck.training.ppo;
    hp.gamma = p.at("gamma").get<double>();
    hp.lambda = p.at("lambda").get<double>();
    hp.clip = p.at("clip").get<double>();
    hp.epochs = p.at("epochs").get<std::size_t>();
    hp.minibatch = p.at("minibatch").get<std::size_t>();
    hp.lr_actor = p.at("lr_actor").get<double>();
    hp.lr_critic = p.at("lr_critic").get<double>();
    hp.entropy_coef = p.at("entropy_coef").get<double>();
    hp.max_grad_norm = p.at("max_grad_norm").get<double>();
    ck.routing.validate();
    ck.training.validate();
    const std::size_t dim = routing::observation_size(ck.routing.k_max);
    const std::size_t h = ck.training.hidden;
    ck.model.actor.net = detail::mlp_from_json(j.at("actor"), {dim, h, h, routing::action_count(ck.routing.k_max)}, "actor");
    ck.model.critic.net = detail::mlp_from_json(j.at("critic"), {dim, h, h, 1}, "critic");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("invalid checkpoint settings: ") + e.what());
  }
}

inline void write_checkpoint(std::ostream& os, const Checkpoint& ck) { os << checkpoint_to_json(ck).dump(1) << '\n'; }

inline Checkpoint read_checkpoint(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace deepadmr::policy
